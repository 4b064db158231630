#include "mvcnn/cli.hpp"

int main(int argc, char** argv) { return mvcnn::cli::run(argc, argv); }
