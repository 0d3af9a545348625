#include <iostream>

#include <CLI11.hpp>

#include "courtside/errors.hpp"
#include "synth/synth.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Writes the scripted demo game's raw inputs"};
    std::uint64_t seed = 7;
    std::string out;
    app.add_option("--seed", seed);
    app.add_option("--out", out)->required();
    CLI11_PARSE(app, argc, argv);
    try {
        courtside::synth::write_fixture(courtside::synth::make_fixture_game(seed), out);
    } catch (const courtside::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
