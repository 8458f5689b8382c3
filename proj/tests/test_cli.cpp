#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli_app.hpp"
#include "cssplc/channel.hpp"
#include "cssplc/results_io.hpp"
#include "cssplc/signal_file.hpp"

using namespace cssplc;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out, err;
};

Run invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "cssplc");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string tmp(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "cssplc_test_cli";
    fs::create_directories(dir);
    return (dir / name).string();
}

std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::string> data_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '#') lines.push_back(line);
    }
    return lines;
}

} // namespace

TEST_CASE("modulate writes one chirp per symbol") {
    const auto path = tmp("one.iq");
    const auto r = invoke({"modulate", "--sf", "7", "--symbol", "0", "-o", path});
    REQUIRE(r.code == 0);
    const auto f = load_signal_file(path);
    CHECK(f.signal.size() == 128);
    CHECK(f.sf == 7);

    const auto big = tmp("big.iq");
    REQUIRE(invoke({"modulate", "--sf", "13", "--p", "64", "--symbols", "0..127", "-o", big}).code == 0);
    const auto g = load_signal_file(big);
    CHECK(g.signal.size() == 128u * 8192u);
    CHECK(g.superbin_size == 64);
}

TEST_CASE("modulate then demodulate recovers the symbols") {
    const auto path = tmp("seq.iq");
    REQUIRE(invoke({"modulate", "--sf", "9", "--p", "8", "--symbols", "3,3,0,0,63,63", "-o", path}).code == 0);
    const auto r = invoke({"demodulate", "-i", path, "--q", "2"});
    REQUIRE(r.code == 0);
    const auto lines = data_lines(r.out);
    REQUIRE(lines.size() == 7);
    CHECK(lines[0] == "frame,decision_mod,decision_enhanced");
    const std::vector<std::string> expected{"0,3,3", "1,3,3", "2,0,0", "3,0,0", "4,63,63", "5,63,63"};
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(lines[i + 1] == expected[i]);
    CHECK(r.out.find("# tool_version: ") != std::string::npos);

    // P = 1 reading of the same file reports chirp indices g P.
    const auto plain = data_lines(invoke({"demodulate", "-i", path, "--p", "1"}).out);
    CHECK(plain.at(5) == "4,504,504");
}

TEST_CASE("sweep is reproducible from the seed") {
    const auto a = tmp("a.csv"), b = tmp("b.csv"), c = tmp("c.json");
    const std::vector<std::string> common{"sweep", "--sf", "8", "--p", "4,16", "--snr", "-12,-8", "--trials", "80",
                                          "--channel", "rayleigh:3", "--seed", "42"};
    auto with = [&](std::vector<std::string> extra) {
        auto args = common;
        args.insert(args.end(), extra.begin(), extra.end());
        return args;
    };
    REQUIRE(invoke(with({"-o", a, "--workers", "1"})).code == 0);
    REQUIRE(invoke(with({"-o", b, "--workers", "4"})).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a).find("# master_seed: 42") != std::string::npos);
    std::ifstream in(a);
    CHECK(parse_results_csv(in, a).size() == 4);

    REQUIRE(invoke(with({"-o", c})).code == 0);
    const auto j = nlohmann::json::parse(slurp(c));
    CHECK(j["schema"] == kResultsSchema);
    CHECK(j["results"].size() == 4);
}

TEST_CASE("config file with flag overrides") {
    const auto cfg = tmp("exp.json");
    std::ofstream(cfg) << R"({"sf": 8, "superbin_sizes": [4], "snr_db": [-10], "trials": 30, "channel": "identity",
                            "_comment": "x"})";
    const auto out = tmp("exp.csv");
    REQUIRE(invoke({"sweep", "-c", cfg, "--trials", "20", "--snr", "inf", "-o", out}).code == 0);
    std::ifstream in(out);
    const auto rs = parse_results_csv(in, out);
    REQUIRE(rs.size() == 1);
    CHECK(rs[0].trials == 20);
    CHECK(rs[0].errors == 0);
    CHECK(rs[0].sf == 8);

    std::ofstream(cfg) << R"({"sf": 8, "trails": 30})";
    CHECK(invoke({"sweep", "-c", cfg, "-o", out}).code == 1);
}

TEST_CASE("validation failures exit 1, I/O failures exit 2") {
    const auto out = tmp("v.csv");
    const auto r = invoke({"sweep", "--sf", "8", "--snr", "-5", "--trials", "0", "-o", out});
    CHECK(r.code == 1);
    CHECK(r.err.find("error:") != std::string::npos);
    CHECK(invoke({"sweep", "--sf", "99", "--snr", "-5", "-o", out}).code == 1);
    CHECK(invoke({"sweep", "--sf", "8", "--p", "3", "--snr", "-5", "-o", out}).code == 1);
    CHECK(invoke({"sweep", "--sf", "8", "--snr", "-5"}).code == 1);  // -o missing
    CHECK(invoke({"sweep", "--sf", "8", "--snr", "-5", "--mode", "fast", "-o", out}).code == 1);
    CHECK(invoke({"frobnicate"}).code == 1);
    CHECK(invoke({}).code == 1);
    CHECK(invoke({"modulate", "--sf", "7", "--symbol", "128", "-o", tmp("x.iq")}).code == 1);
    CHECK(invoke({"demodulate", "-i", tmp("missing.iq")}).code == 2);
    CHECK(invoke({"sweep", "--sf", "8", "--snr", "-5", "--trials", "5", "-o", "/no/such/dir/out.csv"}).code == 2);
    CHECK(invoke({"sweep", "-c", tmp("missing.json"), "-o", out}).code == 2);
}

TEST_CASE("help and version exit 0") {
    const auto r = invoke({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("sweep") != std::string::npos);
    CHECK(invoke({"sweep", "--help"}).code == 0);
    CHECK(invoke({"--version"}).code == 0);
}

TEST_CASE("airtime") {
    const auto r = invoke({"airtime"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("0.328") != std::string::npos);
    CHECK(r.out.find("3.28") != std::string::npos);
    CHECK(r.out.find("32.8") != std::string::npos);

    const auto j = invoke({"airtime", "--sf", "12", "--bw", "3125", "--q", "1", "--json"});
    REQUIRE(j.code == 0);
    const auto doc = nlohmann::json::parse(j.out);
    CHECK(doc["rows"][0]["time_on_air_s"].template get<double>() == doctest::Approx(1.31072));

    CHECK(invoke({"airtime", "--bw", "0"}).code == 1);
    CHECK(invoke({"airtime", "--bw", "-5"}).code == 1);
    CHECK(invoke({"airtime", "--q", "0"}).code == 1);
}

TEST_CASE("channel-gen") {
    const auto r = invoke({"channel-gen", "--channel", "four-tap"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    CHECK(parse_impulse_response(in, "stdout") == four_tap_channel());

    const auto path = tmp("ray.csv");
    REQUIRE(invoke({"channel-gen", "--channel", "rayleigh:4:20", "--seed", "9", "-o", path}).code == 0);
    const auto h = load_impulse_response(path);
    CHECK(h == rayleigh_channel(4.0, 20, 9));
    CHECK(invoke({"channel-gen", "--channel", "rayleigh:x"}).code == 1);
    CHECK(invoke({"channel-gen", "--channel", "nine-tap"}).code == 1);
}

TEST_CASE("capture") {
    const auto out = tmp("cap.csv"), summary = tmp("cap.json");
    const auto r = invoke({"capture", "--sf", "7", "--p", "8", "--snr", "-10", "--trials", "40", "--channel",
                        "identity", "--depths", "1,4", "-o", out, "--summary", summary});
    REQUIRE(r.code == 0);
    const auto lines = data_lines(slurp(out));
    REQUIRE_FALSE(lines.empty());
    CHECK(lines[0] == "snr_db,quantity,q,value");
    // 40 frames: 40 signal, 40 * 15 noise, 40 maxima, plus 10 windows of each at Q = 4 and 40 at Q = 1.
    CHECK(lines.size() == 1 + 40 * 17 + 10 * 17 + 40 * 17);
    CHECK(nlohmann::json::parse(slurp(summary)).is_object());
    CHECK(invoke({"capture", "--sf", "7", "--p", "8", "--snr", "-10", "--symbol", "16", "--depths", "1", "-o", out})
              .code == 1);
}
