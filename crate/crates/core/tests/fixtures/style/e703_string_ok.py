s = 'a;'
