#include "tts/cli.hpp"

int main(int argc, char** argv) { return tts::cli_main(argc, argv); }
