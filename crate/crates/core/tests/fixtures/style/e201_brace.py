spam(ham[1], { eggs: 2})
