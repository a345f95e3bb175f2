for k, v in {}.items():
    print(k)
