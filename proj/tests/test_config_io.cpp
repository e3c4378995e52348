#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "pmc/config.hpp"
#include "pmc/errors.hpp"
#include "pmc/io.hpp"

using namespace pmc;

namespace {

std::string temp_path(const std::string& name) {
    return std::string("/tmp/pmc_test_") + name;
}

}  // namespace

TEST_CASE("config parses, rejects unknown keys, round-trips") {
    const std::string path = temp_path("config.txt");
    {
        std::ofstream out(path);
        out << "pmc-config v1\n";
        out << "# comment\n";
        out << "mesh_level = 5\n";
        out << "fd_eps = 2e-3\n";
        out << "cgo_h_list = 0.4, 0.2, 0.1, 0.05, 0.04\n";
        out << "seed = 7\n";
    }
    const Config cfg = load_config(path);
    CHECK(cfg.mesh_level == 5);
    CHECK(cfg.fd_eps == 2e-3);
    REQUIRE(cfg.cgo_h_list.size() == 5);
    CHECK(cfg.cgo_h_list[3] == 0.05);
    CHECK(cfg.seed == 7);

    {
        std::ofstream out(path);
        out << "pmc-config v1\nnonsense_key = 3\n";
    }
    CHECK_THROWS_AS(load_config(path), ConfigError);

    {
        std::ofstream out(path);
        out << "mesh_level = 5\n";  // missing header
    }
    CHECK_THROWS_AS(load_config(path), ConfigError);

    Config c2;
    apply_override(c2, "gn_reg", "1e-4");
    CHECK(c2.gn_reg == 1e-4);
    CHECK_THROWS_AS(apply_override(c2, "gn_reg", "-1"), ConfigError);
    CHECK_THROWS_AS(apply_override(c2, "bogus", "1"), ConfigError);

    // serialize → parse is the identity
    const std::string serialized = serialize_config(cfg);
    write_file(path, serialized);
    const Config back = load_config(path);
    CHECK(serialize_config(back) == serialized);
    std::remove(path.c_str());
}

TEST_CASE("scalar field dump round-trips exactly") {
    ScalarField f(4);
    f << 0.1, -2.5e-17, 3.333333333333333, 7;
    std::stringstream ss;
    dump_scalar_field(ss, f);
    const ScalarField back = load_scalar_field(ss);
    REQUIRE(back.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(back[i] == f[i]);
}

TEST_CASE("out dir resolution prefers config, then env, then default") {
    Config cfg;
    cfg.out_dir = "explicit";
    CHECK(cfg.resolve_out_dir() == "explicit");
    cfg.out_dir.clear();
    setenv("PMC_OUT_DIR", "/tmp/pmc_env_dir", 1);
    CHECK(cfg.resolve_out_dir() == "/tmp/pmc_env_dir");
    unsetenv("PMC_OUT_DIR");
    CHECK(cfg.resolve_out_dir() == "pmc_out");
}
