a = 1 ;

   
