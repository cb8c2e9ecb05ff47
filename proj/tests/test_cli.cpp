#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

// Subprocess tests against the installed binary; MODVAL_CLI_PATH is set by
// the build. Every test works through real files and real exit codes.

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

const fs::path& scratch_dir() {
    static const fs::path dir = [] {
        std::string tmpl = (fs::temp_directory_path() / "modval_cli_XXXXXX").string();
        REQUIRE(mkdtemp(tmpl.data()) != nullptr);
        return fs::path(tmpl);
    }();
    return dir;
}

fs::path unique_path(const std::string& stem) {
    static int counter = 0;
    return scratch_dir() / (stem + "_" + std::to_string(counter++));
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void spill(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    REQUIRE(f.good());
    f << text;
}

CliResult run_cli(const std::string& args, const std::string& stdin_text = "") {
    const fs::path in = unique_path("in");
    const fs::path out = unique_path("out");
    const fs::path err = unique_path("err");
    spill(in, stdin_text);
    const std::string cmd = std::string(MODVAL_CLI_PATH) + " " + args + " < " + in.string() +
                            " > " + out.string() + " 2> " + err.string();
    const int rc = std::system(cmd.c_str());
    CliResult res;
    res.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    res.out = slurp(out);
    res.err = slurp(err);
    return res;
}

fs::path write_spec(const std::string& text) {
    const fs::path p = unique_path("spec");
    spill(p, text);
    return p;
}

/// Result document with the timestamp removed, for replay comparisons.
json doc_sans_timestamp(const std::string& text) {
    json doc = json::parse(text);
    REQUIRE(doc.contains("timestamp"));
    doc.erase("timestamp");
    return doc;
}

const json& find_entry(const json& doc, const std::string& name) {
    for (const auto& entry : doc.at("results").at("results"))
        if (entry.at("name") == name) return entry;
    FAIL("missing report entry " << name);
    std::abort();
}

const std::string kHardySpec = R"json({
  "space": [2, 2],
  "pre": [0, 1, 1, 1],
  "post": [1, -1, -1, 1],
  "observables": [
    {"site": 0, "op": "projector(0)"},
    {"site": 1, "op": "projector(0)"}
  ]
})json";

}  // namespace

TEST_CASE("hardy scenario reports the golden weak-value triple") {
    const auto res = run_cli("scenario hardy");
    REQUIRE(res.code == 0);
    const json doc = json::parse(res.out);
    CHECK(doc.at("tool") == "modval");
    CHECK(doc.at("command") == "scenario");
    CHECK(doc.contains("version"));
    CHECK(doc.contains("seed"));
    CHECK(doc.at("resolved_spec").at("scenario") == "hardy");
    CHECK(doc.at("results").at("all_pass") == true);

    const auto weak = [&](const std::string& name) {
        const auto& v = find_entry(doc, name).at("value");
        return std::abs(v[0].get<double>() - (name == "weak_P_A_P_B" ? 0.0 : 1.0)) +
               std::abs(v[1].get<double>());
    };
    CHECK(weak("weak_P_A") < 1e-12);
    CHECK(weak("weak_P_B") < 1e-12);
    CHECK(weak("weak_P_A_P_B") < 1e-12);
}

TEST_CASE("modular value at zero coupling strength is one") {
    const auto spec = write_spec(R"json({
      "space": [2],
      "pre": [1, [0.6, 0.2]],
      "post": [[0.3, -0.1], 0.9],
      "observable": {"site": 0, "op": "pauli_x"},
      "k": 0.0
    })json");
    const auto res = run_cli("modular-value --spec " + spec.string());
    REQUIRE(res.code == 0);
    const json doc = json::parse(res.out);
    const auto& v = doc.at("results").at("modular_value");
    CHECK(std::abs(v[0].get<double>() - 1.0) < 1e-12);
    CHECK(std::abs(v[1].get<double>()) < 1e-12);
}

TEST_CASE("joint weak value sweep on the paradox state converges to zero") {
    const auto spec = write_spec(kHardySpec);
    const auto res = run_cli("rs-estimate --spec " + spec.string() + " --format csv");
    REQUIRE(res.code == 0);
    std::istringstream lines(res.out);
    std::string header;
    REQUIRE(std::getline(lines, header));
    CHECK(header == "k,estimate,target,abs_error");
    double prev_err = -1.0;
    int rows = 0;
    for (std::string line; std::getline(lines, line);) {
        if (line.empty()) continue;
        double k, est, target, err;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &k, &est, &target, &err) == 4);
        CHECK(std::abs(target) < 1e-12);
        CHECK(err < 1e-8);
        if (rows > 0) CHECK(err <= prev_err + 1e-12);
        prev_err = err;
        ++rows;
    }
    CHECK(rows == 3);
}

TEST_CASE("exit codes separate success, validation failures, and domain failures") {
    const auto good = write_spec(R"json({
      "space": [2], "pre": [1, 0], "post": [1, 1],
      "observable": {"site": 0, "op": "pauli_z"}
    })json");
    CHECK(run_cli("weak-value --spec " + good.string()).code == 0);

    CHECK(run_cli("weak-value --spec " + scratch_dir().string() + "/absent.json").code == 2);

    const auto malformed = write_spec("{\n  \"space\": [2,\n");
    const auto bad = run_cli("weak-value --spec " + malformed.string());
    CHECK(bad.code == 2);
    CHECK(bad.err.find(malformed.filename().string()) != std::string::npos);

    const auto missing_field = write_spec(R"json({"space": [2], "pre": [1, 0]})json");
    CHECK(run_cli("weak-value --spec " + missing_field.string()).code == 2);

    const auto unknown_field = write_spec(R"json({"space": [2], "pre": [1, 0], "pots": [0, 1]})json");
    const auto uf = run_cli("weak-value --spec " + unknown_field.string());
    CHECK(uf.code == 2);
    CHECK(uf.err.find("pots") != std::string::npos);

    const auto orthogonal = write_spec(R"json({
      "space": [2], "pre": [1, 0], "post": [0, 1],
      "observable": {"site": 0, "op": "pauli_z"}
    })json");
    CHECK(run_cli("weak-value --spec " + orthogonal.string()).code == 3);

    CHECK(run_cli("weak-value --no-such-flag").code == 2);
    CHECK(run_cli("scenario no-such-scenario").code == 2);
    CHECK(run_cli("scenario hardy --format yaml").code == 2);
}

TEST_CASE("sampled runs replay byte-identically apart from the timestamp") {
    const auto spec = write_spec(R"json({
      "space": [2, 2],
      "pre": [0, 1, 1, 1],
      "post": [1, -1, -1, 1],
      "observable": {"site": 0, "op": "projector(0)"},
      "k": 3.141592653589793,
      "shots": 50000,
      "seed": 42
    })json");
    const auto first = run_cli("tomography --spec " + spec.string());
    const auto second = run_cli("tomography --spec " + spec.string());
    REQUIRE(first.code == 0);
    REQUIRE(second.code == 0);
    CHECK(doc_sans_timestamp(first.out) == doc_sans_timestamp(second.out));

    const auto reseeded = run_cli("tomography --spec " + spec.string() + " --seed 43");
    REQUIRE(reseeded.code == 0);
    CHECK(doc_sans_timestamp(reseeded.out) != doc_sans_timestamp(first.out));
    CHECK(doc_sans_timestamp(reseeded.out).at("seed") == 43);

    const auto explicit_same = run_cli("tomography --spec " + spec.string() + " --seed 42");
    CHECK(doc_sans_timestamp(explicit_same.out) == doc_sans_timestamp(first.out));
}

TEST_CASE("the resolved spec echoed in a run reproduces that run") {
    const auto spec = write_spec(R"json({
      "space": [2, 2],
      "pre": [0, 1, 1, 1],
      "post": [1, -1, -1, 1],
      "observable": {"site": 1, "op": "projector(0)"},
      "k": 1.0471975511965976,
      "shots": 20000
    })json");
    const auto first = run_cli("tomography --spec " + spec.string());
    REQUIRE(first.code == 0);
    const json echoed = json::parse(first.out).at("resolved_spec");
    const auto roundtrip = write_spec(echoed.dump());
    const auto second = run_cli("tomography --spec " + roundtrip.string());
    REQUIRE(second.code == 0);
    CHECK(doc_sans_timestamp(first.out) == doc_sans_timestamp(second.out));
}

TEST_CASE("pointer simulation writes density sidecars next to the output file") {
    const auto spec = write_spec(R"json({
      "space": [2],
      "pre": [1, [0.5, 0.5]],
      "post": [[0.8, 0.1], -0.4],
      "observable": {"site": 0, "op": "pauli_z"},
      "k": 0.1
    })json");
    const auto out = unique_path("ptr").string() + ".json";
    const auto res = run_cli("pointer-sim --spec " + spec.string() + " --out " + out);
    REQUIRE(res.code == 0);
    const json doc = json::parse(slurp(out));
    CHECK(doc.at("results").at("fidelity_deficit").get<double>() < 1e-3);
    CHECK(doc.at("resolved_spec").at("pointer").at("grid").contains("n"));

    const std::string base = out.substr(0, out.size() - 5);
    const std::string q_csv = slurp(base + ".q_density.csv");
    const std::string p_csv = slurp(base + ".p_density.csv");
    CHECK(q_csv.rfind("q,exact_density,effective_density\n", 0) == 0);
    CHECK(p_csv.rfind("p,exact_density,effective_density\n", 0) == 0);
}

TEST_CASE("a problem document can be piped through stdin") {
    const auto spec = write_spec(R"json({
      "space": [2],
      "pre": [1, [0.6, 0.2]],
      "post": [[0.3, -0.1], 0.9],
      "observable": {"site": 0, "op": "pauli_y"}
    })json");
    const auto from_file = run_cli("weak-value --spec " + spec.string());
    const auto from_stdin = run_cli("weak-value --spec -", slurp(spec));
    REQUIRE(from_file.code == 0);
    REQUIRE(from_stdin.code == 0);
    CHECK(doc_sans_timestamp(from_file.out) == doc_sans_timestamp(from_stdin.out));
}

TEST_CASE("meter simulation with the oracle flag reports a zero deficit") {
    const auto spec = write_spec(R"json({
      "space": [2, 2],
      "pre": [0, 1, 1, 1],
      "post": [1, -1, -1, 1],
      "observable": {"site": 0, "op": "projector(0)"},
      "k": 3.141592653589793,
      "meter": {"type": "qubit"}
    })json");
    const auto res = run_cli("meter-sim --oracle --spec " + spec.string());
    REQUIRE(res.code == 0);
    const json doc = json::parse(res.out);
    CHECK(std::abs(doc.at("results").at("oracle_fidelity_deficit").get<double>()) < 1e-10);
    CHECK(doc.at("results").at("provenance") == "effective");
}

TEST_CASE("scenario runs accept sampling flags and echo them") {
    const auto res = run_cli("scenario osaka --beta 0.25 --shots 30000 --seed 11");
    REQUIRE(res.code == 0);
    const json doc = json::parse(res.out);
    CHECK(doc.at("seed") == 11);
    CHECK(doc.at("resolved_spec").at("shots") == 30000);
    const auto& beta = doc.at("resolved_spec").at("beta");
    CHECK(beta[0].get<double>() == doctest::Approx(0.25));
    const auto replay = run_cli("scenario osaka --beta 0.25 --shots 30000 --seed 11");
    CHECK(doc_sans_timestamp(res.out) == doc_sans_timestamp(replay.out));
}
