#!/usr/bin/env python python python python python python python python python python python python
