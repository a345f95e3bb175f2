foo(bar = 1)
