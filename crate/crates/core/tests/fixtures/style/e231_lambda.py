f = lambda x:x
