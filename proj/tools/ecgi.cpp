#include <CLI11.hpp>

int main(int argc, char** argv) {
  CLI::App app{"ecgi: TMP simulation, generative modeling, and ECG inversion"};
  app.require_subcommand(1);
  CLI11_PARSE(app, argc, argv);
  return 0;
}
