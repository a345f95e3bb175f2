print(*args, **kwargs)
x = 2**8
