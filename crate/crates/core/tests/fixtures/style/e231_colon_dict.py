d = {'a':1}
