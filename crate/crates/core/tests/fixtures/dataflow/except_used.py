try:
    pass
except ValueError as err:
    print(err)
