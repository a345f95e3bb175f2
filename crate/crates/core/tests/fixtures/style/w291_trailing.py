x = 1  
