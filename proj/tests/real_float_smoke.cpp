#include "mvcnn/mvcnn.hpp"
int main() { return 0; }
