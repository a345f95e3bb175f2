a = (1,2)
