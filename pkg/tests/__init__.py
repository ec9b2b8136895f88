# fdtlab tests
