#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "mlao/config.hpp"

namespace fs = std::filesystem;
using mlao::parse_csv;

namespace {

struct Run {
    int exit_code;
    std::string output;
};

const fs::path& work_dir()
{
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "mlao_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

Run cli(const std::string& args)
{
    const auto log = work_dir() / "last_output.txt";
    const std::string cmd = std::string("\"") + MLAO_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

fs::path write_file(const std::string& name, const std::string& text)
{
    const auto p = work_dir() / name;
    std::ofstream(p) << text;
    return p;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

// Small grid so every command runs in seconds.
const fs::path& small_config()
{
    static const fs::path p = write_file("small.cfg", "grid_size = 64\nmicroscope.grid_size = 64\nn_samples = 100\n");
    return p;
}

const fs::path& dataset()
{
    static const fs::path p = [] {
        const auto out = work_dir() / "data.bin";
        const auto r = cli("datagen --config " + q(small_config()) + " --scheme ast2 --seed 5 --out " + q(out));
        REQUIRE_MESSAGE(r.exit_code == 0, r.output);
        return out;
    }();
    return p;
}

const fs::path& model()
{
    static const fs::path p = [] {
        const auto out = work_dir() / "model.bin";
        const auto r = cli("train --config " + q(small_config()) + " --data " + q(dataset()) + " --epochs 2 --out " + q(out));
        REQUIRE_MESSAGE(r.exit_code == 0, r.output);
        return out;
    }();
    return p;
}

} // namespace

TEST_CASE("datagen")
{
    const auto& a = dataset();
    CHECK(fs::file_size(a) > 0);
    const auto b = work_dir() / "data_again.bin";
    REQUIRE(cli("datagen --config " + q(small_config()) + " --scheme ast2 --seed 5 --out " + q(b)).exit_code == 0);
    CHECK(slurp(a) == slurp(b));

    SUBCASE("invalid sharpness band is rejected with a message")
    {
        const auto bad = write_file("bad_band.cfg", "grid_size = 64\nmetric.kind = sharpness\nmetric.n = 0.3\nmetric.m = 0.2\n");
        const auto r = cli("datagen --config " + q(bad) + " --samples 2 --out " + q(work_dir() / "never.bin"));
        CHECK(r.exit_code == 2);
        CHECK(r.output.find("sharpness band requires 1 > m > n > 0") != std::string::npos);
        CHECK_FALSE(fs::exists(work_dir() / "never.bin"));
    }
    SUBCASE("unknown configuration keys are rejected")
    {
        const auto bad = write_file("typo.cfg", "grid_sise = 64\n");
        const auto r = cli("datagen --config " + q(bad) + " --samples 2 --out " + q(work_dir() / "never.bin"));
        CHECK(r.exit_code == 2);
        CHECK(r.output.find("grid_sise") != std::string::npos);
    }
}

TEST_CASE("train")
{
    const auto start = std::chrono::steady_clock::now();
    const auto& m = model();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(seconds < 60.0);
    CHECK(fs::exists(m));

    auto loss_path = m;
    loss_path += ".loss.csv";
    const auto rows = parse_csv(slurp(loss_path));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"epoch", "train_loss", "validation_loss"});
    CHECK(rows[1][0] == "1");
    CHECK(rows[2][0] == "2");

    SUBCASE("fixed seed gives identical models")
    {
        const auto again = work_dir() / "model_again.bin";
        REQUIRE(cli("train --config " + q(small_config()) + " --data " + q(dataset()) + " --epochs 2 --out " + q(again)).exit_code == 0);
        CHECK(slurp(again) == slurp(m));
    }
    SUBCASE("missing dataset")
    {
        const auto out = work_dir() / "orphan.bin";
        const auto r = cli("train --data " + q(work_dir() / "no_such.bin") + " --out " + q(out));
        CHECK(r.exit_code == 2);
        CHECK_FALSE(fs::exists(out));
    }
    SUBCASE("scheme mismatch")
    {
        const auto out = work_dir() / "mismatch.bin";
        const auto r = cli("train --data " + q(dataset()) + " --scheme 2n --epochs 1 --out " + q(out));
        CHECK(r.exit_code == 2);
        CHECK_FALSE(fs::exists(out));
    }
}

TEST_CASE("correct")
{
    const auto out = work_dir() / "traj.csv";
    auto r = cli("correct --config " + q(small_config()) + " --model " + q(model()) + " --trials 1 --iterations 3 --out " + q(out));
    REQUIRE_MESSAGE(r.exit_code == 0, r.output);
    auto rows = parse_csv(slurp(out));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0][3] == "images_cum");
    for (int k = 1; k <= 3; ++k) {
        CHECK(rows[k][2] == std::to_string(k));
        CHECK(rows[k][3] == std::to_string(2 * k));
    }
    CHECK(slurp(out).rfind("# ", 0) == 0);

    r = cli("correct --config " + q(small_config()) + " --oracle --iterations 2 --out " + q(out));
    REQUIRE_MESSAGE(r.exit_code == 0, r.output);
    rows = parse_csv(slurp(out));
    REQUIRE(rows.size() == 3);
    for (std::size_t k = 1; k < rows.size(); ++k) CHECK(std::stod(rows[k][5]) == 0.0);

    CHECK(cli("correct --model " + q(work_dir() / "no_model.bin") + " --out " + q(out)).exit_code == 2);
}

TEST_CASE("compare")
{
    const auto out = work_dir() / "binned.csv";
    const auto traj = work_dir() / "cmp_traj.csv";
    const auto r = cli("compare --config " + q(small_config()) + " --zero --trials 3 --bins 0.5:0.7,1:1.2 --out " + q(out) +
                       " --trajectory " + q(traj));
    REQUIRE_MESSAGE(r.exit_code == 0, r.output);
    const auto rows = parse_csv(slurp(traj));
    REQUIRE(rows.size() == 7);
    for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k][4] == rows[k][5]);
    CHECK(parse_csv(slurp(out)).size() == 3);
    CHECK(cli("compare --out " + q(out)).exit_code == 2);
    CHECK(cli("compare --zero --bins 1:0.5 --out " + q(out)).exit_code == 2);
}

TEST_CASE("analyze")
{
    const auto out = work_dir() / "weights.csv";
    const auto profile = work_dir() / "profile.csv";
    const auto r = cli("analyze --fresh 2n --model " + q(model()) + " --out " + q(out) + " --profile-out " + q(profile));
    REQUIRE_MESSAGE(r.exit_code == 0, r.output);
    const auto rows = parse_csv(slurp(out));
    REQUIRE(rows.size() == 3);
    for (std::size_t k = 1; k < rows.size(); ++k) {
        REQUIRE(rows[k].size() == 6);
        for (std::size_t c = 1; c < 6; ++c) CHECK(std::stod(rows[k][c]) > 0.0);
    }
    CHECK(parse_csv(slurp(profile)).size() > 1);
}

TEST_CASE("sweep")
{
    const auto out = work_dir() / "sweep.csv";
    const auto r = cli("sweep --config " + q(small_config()) + " --model " + q(model()) + " --factors 1.0,1.1,1.2 --samples 10 --out " +
                       q(out));
    REQUIRE_MESSAGE(r.exit_code == 0, r.output);
    const auto rows = parse_csv(slurp(out));
    REQUIRE(rows.size() == 4);
    CHECK(rows[1][0] == "1");
    CHECK(rows[3][0] == "1.2");
    CHECK(cli("sweep --model " + q(model()) + " --factors 3.0 --out " + q(out)).exit_code == 2);
}

TEST_CASE("usage errors")
{
    CHECK(cli("").exit_code != 0);
    CHECK(cli("frobnicate").exit_code == 2);
    CHECK(cli("datagen").exit_code == 2);
    CHECK(cli("--help").exit_code == 0);
}
