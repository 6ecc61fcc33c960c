// Command-line driver: run, convergence, project, mesh.
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lgnc/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Lagrange-Galerkin solver for the Boussinesq natural convection problem"};
    app.require_subcommand(1);

    std::string config;
    auto* run = app.add_subcommand("run", "run one simulation from a config file");
    run->add_option("config", config, "config file (key = value)")->required();

    auto* conv = app.add_subcommand("convergence", "spatial or temporal convergence study");
    conv->add_option("config", config, "config file (key = value)")->required();

    auto* proj = app.add_subcommand("project", "Stokes-Poisson projection errors over a level ladder");
    proj->add_option("config", config, "config file (key = value)")->required();

    int n = 8, refine = 0;
    std::string out_path;
    auto* mesh = app.add_subcommand("mesh", "export a unit-square mesh in the text format");
    mesh->add_option("-n,--n", n, "cells per side")->required();
    mesh->add_option("-r,--refine", refine, "uniform refinements applied afterwards");
    mesh->add_option("-o,--out", out_path, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? lgnc::kExitOk : lgnc::kExitConfig;
    }

    if (*run) return lgnc::cmd_run(config, std::cout, std::cerr);
    if (*conv) return lgnc::cmd_convergence(config, std::cout, std::cerr);
    if (*proj) return lgnc::cmd_project(config, std::cout, std::cerr);
    return lgnc::cmd_mesh(n, refine, out_path, std::cout, std::cerr);
}
