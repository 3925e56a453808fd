#include <string>
#include <vector>

#include "msnp/harness.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return msnp::harness::cli_main(args);
}
