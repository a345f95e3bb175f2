#
x = 1
