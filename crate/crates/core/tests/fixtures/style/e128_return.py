def f():
    return foo(1,
        2)
