result = some_function(
    arg1,
    arg2)
