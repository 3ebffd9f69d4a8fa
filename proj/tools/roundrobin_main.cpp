#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "roundrobin/cli.hpp"

namespace rc = roundrobin::cli;

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    rc::RunSpec spec;
    try {
        spec = rc::parse_run_spec(args);
    } catch (const rc::HelpRequested& help) {
        std::cout << help.text;
        return 0;
    } catch (const rc::UsageError& e) {
        std::cerr << e.what() << '\n';
        return 1;
    }

    try {
        if (spec.out) {
            std::ofstream file(*spec.out, std::ios::binary);
            if (!file) {
                std::cerr << "error: cannot open output file " << *spec.out << '\n';
                return 2;
            }
            rc::run_spec(spec, file);
        } else {
            rc::run_spec(spec, std::cout);
        }
    } catch (const roundrobin::DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const roundrobin::CapacityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
