foo(1,
    # comment
    2)
