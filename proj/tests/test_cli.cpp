#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <string>

#ifndef PLRC_CLI_PATH
#error "PLRC_CLI_PATH must point at the command-line driver"
#endif

using nlohmann::json;

namespace {

// Creates a temp file holding `content` and returns its path.
std::string temp_file(const std::string& content) {
    char path[] = "/tmp/plrc-cli-test-XXXXXX";
    int fd = mkstemp(path);
    REQUIRE(fd >= 0);
    close(fd);
    std::ofstream(path) << content;
    return path;
}

struct RunResult {
    int exit_code;
    std::string out;
};

// Runs the driver with the given shell-quoted arguments, merging stderr.
RunResult run_cli(const std::string& args, const std::string& stdin_data = "") {
    std::string cmd = std::string(PLRC_CLI_PATH) + " " + args + " 2>&1";
    if (!stdin_data.empty()) cmd += " < " + temp_file(stdin_data);
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("parse echoes canonical forms and reports errors") {
    RunResult r = run_cli("parse 'Delta I'");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "(\\y. y y) (\\x. x)\n");  // binders renamed apart

    r = run_cli("parse --resource 'x [y,z]'");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "x [y, z]\n");

    r = run_cli("parse --json 'x (+1/2) y'");
    CHECK(r.exit_code == 0);
    CHECK(json::parse(r.out)["parsed"] == "x (+1/2) y");

    r = run_cli("parse '\\x'");
    CHECK(r.exit_code == 2);
    CHECK(contains(r.out, "error"));

    // Term read from stdin when the positional is absent.
    r = run_cli("parse", "I\n");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "\\x. x\n");
}

TEST_CASE("reduce and normalize") {
    RunResult r = run_cli("reduce '(\\x. x) [y]'");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "-> "));
    CHECK(contains(r.out, "y"));

    r = run_cli("reduce 'x [y]'");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "normal\n");

    r = run_cli("normalize '(\\x. x [x]) [I, I]'");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "2.\\x. x\n");

    r = run_cli("normalize --json '(\\x. x [x]) [I, I]'");
    CHECK(r.exit_code == 0);
    json j = json::parse(r.out);
    REQUIRE(j["normal_form"].size() == 1);
    CHECK(j["normal_form"][0]["term"] == "\\x. x");
    CHECK(j["normal_form"][0]["num"] == "2");
}

TEST_CASE("coherence and multinomial") {
    CHECK(run_cli("coherence 'x [y]' 'x [y, y]'").out == "coherent\n");
    CHECK(run_cli("coherence 'x' '\\x. x'").out == "incoherent\n");
    CHECK(run_cli("multinomial '[x, x, x]'").out == "6\n");
    CHECK(json::parse(run_cli("multinomial --json '[x, x, y]'").out)["multinomial"] ==
          "2");
}

TEST_CASE("run prints the frontier and the convergence bracket") {
    RunResult r = run_cli("run --fuel 16 'Delta (I (+1/2) Omega)'");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "resolved (mass 1/4):"));
    CHECK(contains(r.out, "l{1/2} l{1/2}"));
    CHECK(contains(r.out, "\\x. x"));
    CHECK(contains(r.out, "unresolved (mass 3/4):"));
    CHECK(contains(r.out, "convergence in [1/4, 1]"));

    r = run_cli("run --fuel 16 --trace 'Delta (I (+1/2) Omega)'");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "+- l{1/2}"));
    CHECK(contains(r.out, "=> "));

    r = run_cli("run --fuel 16 --json 'Delta (I (+1/2) Omega)'");
    CHECK(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j["resolved_mass"] == "1/4");
    CHECK(j["unresolved_mass"] == "3/4");
    REQUIRE(j["resolved"].size() == 1);
    CHECK(j["resolved"][0]["path"] == "l{1/2} l{1/2}");
    CHECK(j["convergence"]["lower"] == "1/4");
    CHECK(j["convergence"]["upper"] == "1");
}

TEST_CASE("taylor truncations") {
    RunResult r = run_cli("taylor --explicit --size-bound 6 'x (+1/3) y'");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "l{1/3} x"));
    CHECK(contains(r.out, "r{1/3} y"));

    r = run_cli("taylor --size-bound 6 'x (+1/3) y'");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "1/3.x"));
    CHECK(contains(r.out, "2/3.y"));
}

TEST_CASE("taylor normal form of the introductory example") {
    RunResult r = run_cli("taylor-nf --fuel 16 'Delta (I (+1/2) Omega)'");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "1/4.\\x. x"));
    CHECK(contains(r.out, "residual: 3/4"));

    r = run_cli("taylor-nf --fuel 16 --json 'Delta (I (+1/2) Omega)'");
    CHECK(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j["residual"] == "3/4");
    REQUIRE(j["taylor_nf"].size() == 1);
    CHECK(j["taylor_nf"][0]["term"] == "\\x. x");
    CHECK(j["taylor_nf"][0]["num"] == "1");
    CHECK(j["taylor_nf"][0]["den"] == "4");
}

TEST_CASE("bohm approximants and tree tests") {
    RunResult r = run_cli("bohm --depth 2 --fuel 16 'Delta (I (+1/2) Omega)'");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "{1/4: \\x1. x1; residual 3/4}\n");

    r = run_cli("test --btt 'ev(w)' 'I (+1/2) Omega'");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "[1/2, 1]\n");

    r = run_cli("test --btt 'ev(w' 'I'");
    CHECK(r.exit_code == 2);
}

TEST_CASE("tts subcommands work on files and stdin") {
    std::string file = temp_file(
        "lin q1 --ev-> {h: 1/2}\n"
        "lin q2 --ev-> {ha: 1/4, hb: 1/4}\n"
        "bra h --(lam 1 ^0)->\n"
        "bra ha --(lam 1 ^0)->\n"
        "bra hb --(lam 2 ^0)->\n");

    RunResult r = run_cli("tts bisim " + file + " q1 q2");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "not bisimilar\n");

    r = run_cli("tts test " + file + " q1 'ev(w)'");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "1/2\n");

    r = run_cli("tts test --branching " + file + " hb '\"lam 2 ^0\"()'");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "1\n");

    r = run_cli("tts distinguish " + file + " q1 q2");
    CHECK(r.exit_code == 0);
    CHECK(r.out != "none\n");
    CHECK(contains(r.out, "ev("));

    // Same system over stdin.
    std::ifstream in(file);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    r = run_cli("tts bisim - q1 q2", text);
    CHECK(r.exit_code == 0);
    CHECK(r.out == "not bisimilar\n");

    r = run_cli("tts from-terms 'I (+1/2) Omega' 'I'");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "lin t0 --ev->"));
    CHECK(contains(r.out, "lin t1 --ev->"));
    CHECK(contains(r.out, "bra h0 --(lam 1 ^0)->"));

    r = run_cli("tts bisim " + file + " q1 zz");
    CHECK(r.exit_code == 2);
}

TEST_CASE("compare pretty report and assertion exit codes") {
    RunResult r = run_cli("compare 'x (+1/2) y' 'x'");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "generic taylor truncations: different"));
    CHECK(contains(r.out, "separating test: "));

    r = run_cli("compare --assert-equal 'x (+1/2) y' 'x'");
    CHECK(r.exit_code == 1);

    r = run_cli("compare --assert-equal 'x (+1/2) y' 'y (+1/2) x'");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "generic taylor truncations: equal"));

    r = run_cli("compare --json 'x (+1/2) y' 'x'");
    CHECK(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j["separated"] == true);
    CHECK(j["taylor"]["equal"] == false);
}

TEST_CASE("usage errors exit 2") {
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("frobnicate x").exit_code == 2);
    CHECK(run_cli("coherence 'x'").exit_code == 2);  // missing argument
    CHECK(run_cli("tts").exit_code == 2);            // missing subcommand
}
