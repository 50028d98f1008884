unsigned long factorial(unsigned n);
