f(a=1, b=[2])
lambda x=1: x
