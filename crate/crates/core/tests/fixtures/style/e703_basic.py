x = 1;
