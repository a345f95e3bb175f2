#!/usr/bin/env python
#!not shebang
x = 1
