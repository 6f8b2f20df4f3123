// Exercises the installed CLI end to end: exit-code contract, state-file
// round-trips, tamper rejection, and the bench output format.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#ifndef VPE_CLI_PATH
#define VPE_CLI_PATH "./vpe"
#endif

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code;
    std::string out;
};

RunResult run(const std::string& args) {
    std::string cmd = std::string(VPE_CLI_PATH) + " " + args + " 2>&1";
    std::array<char, 4096> buf;
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (fgets(buf.data(), buf.size(), pipe)) out += buf.data();
    int status = pclose(pipe);
    return {WEXITSTATUS(status), out};
}

struct TmpDir {
    fs::path path;
    TmpDir() {
        path = fs::temp_directory_path() /
               ("vpe-cli-test-" + std::to_string(uint64_t(::getpid())) + "-" +
                std::to_string(rand()));
        fs::create_directories(path);
    }
    ~TmpDir() { fs::remove_all(path); }
};

struct TestModeGuard {
    TestModeGuard() {
        setenv("VESPO_TEST_MODE", "1", 1);
        srand(1234);
    }
};
const TestModeGuard guard;

}  // namespace

TEST_CASE("vespo lifecycle over state files") {
    TmpDir tmp;
    std::string dir = (tmp.path / "v").string();
    auto setup = run("setup --protocol vespo --state-dir " + dir +
                     " --degree 24 --lhe-bits 768 --seed 42");
    REQUIRE(setup.code == 0);
    REQUIRE(fs::exists(dir + "/client.state"));
    REQUIRE(fs::exists(dir + "/server.state"));

    auto eval = run("eval --state-dir " + dir + " --point 5 --seed 43");
    REQUIRE(eval.code == 0);

    auto update = run("update --state-dir " + dir + " --index 2 --delta 7 --seed 44");
    REQUIRE(update.code == 0);
    CHECK(update.out.find("OK") != std::string::npos);

    // value at the same point moves by exactly delta * r^i = 7 * 25
    auto eval2 = run("eval --state-dir " + dir + " --point 5 --seed 45");
    REQUIRE(eval2.code == 0);

    // out-of-range update is an operational error and leaves states alone
    auto bad = run("update --state-dir " + dir + " --index 99 --delta 1 --seed 46");
    CHECK(bad.code == 1);
    auto eval3 = run("eval --state-dir " + dir + " --point 5 --seed 47");
    CHECK(eval3.out == eval2.out);
}

TEST_CASE("dpor lifecycle, corruption and exit codes") {
    TmpDir tmp;
    std::string dir = (tmp.path / "d").string();
    std::string dbfile = (tmp.path / "raw.bin").string();
    {
        std::ofstream f(dbfile, std::ios::binary);
        for (int i = 0; i < 5000; ++i) f.put(char(i * 37 + 11));
    }
    auto setup = run("setup --protocol dpor --state-dir " + dir + " --input " + dbfile +
                     " --lhe-bits 768 --shape square --seed 50");
    REQUIRE(setup.code == 0);
    CHECK(setup.out.find("shape:") != std::string::npos);

    auto audit = run("audit --state-dir " + dir + " --seed 51");
    REQUIRE(audit.code == 0);

    auto upd = run("update --state-dir " + dir + " --row 1 --col 2 --value 31337 --seed 52");
    REQUIRE(upd.code == 0);
    REQUIRE(run("audit --state-dir " + dir + " --seed 53").code == 0);

    // out-of-band corruption: flip a data byte behind the protocol's back
    {
        std::fstream f(dir + "/database.vdb",
                       std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(200);
        f.put(char(0x5a));
    }
    auto bad = run("audit --state-dir " + dir + " --seed 54");
    CHECK(bad.code == 2);
    CHECK(bad.out.find("DOT_FAIL") != std::string::npos);

    // the transcript log recorded both outcomes
    std::ifstream log(dir + "/audit.log");
    std::string all((std::istreambuf_iterator<char>(log)), std::istreambuf_iterator<char>());
    CHECK(all.find("accept") != std::string::npos);
    CHECK(all.find("reject") != std::string::npos);
}

TEST_CASE("pubdyn lifecycle with bulletin") {
    TmpDir tmp;
    std::string dir = (tmp.path / "p").string();
    REQUIRE(run("setup --protocol pubdyn --state-dir " + dir + " --degree 12 --seed 60").code ==
            0);
    REQUIRE(fs::exists(dir + "/bulletin.state"));
    REQUIRE(run("eval --state-dir " + dir + " --seed 61").code == 0);
    REQUIRE(run("update --state-dir " + dir + " --index 3 --delta 9 --seed 62").code == 0);
    REQUIRE(run("eval --state-dir " + dir + " --seed 63").code == 0);

    // corrupt the server's stored polynomial: next eval must reject
    {
        std::fstream f(dir + "/server.state", std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(64);
        f.put(char(0x17));
    }
    auto bad = run("eval --state-dir " + dir + " --seed 64");
    CHECK(bad.code != 0);
}

TEST_CASE("invalid configuration leaves no partial state") {
    TmpDir tmp;
    std::string dir = (tmp.path / "x").string();
    auto bad = run("setup --protocol vespo --state-dir " + dir +
                   " --degree 8 --curve not-a-curve --seed 70");
    CHECK(bad.code == 1);
    CHECK(!fs::exists(dir + "/client.state"));

    // capacity violation: 254-bit plaintexts cannot fit a 256-bit modulus
    auto cap = run("setup --protocol vespo --state-dir " + dir +
                   " --degree 8 --lhe-bits 256 --seed 71");
    CHECK(cap.code == 1);
    CHECK(cap.out.find("capacity") != std::string::npos);
}

TEST_CASE("bench emits the tab-separated table") {
    auto res = run("bench --protocol pubdyn --degrees 16,32 --workers 1 --reps 3 --seed 80");
    REQUIRE(res.code == 0);
    CHECK(res.out.find("protocol\tsize\tworkers\tphase\tmedian_ms\treps") != std::string::npos);
    CHECK(res.out.find("pubdyn\t16\t1\tserver_certificate") != std::string::npos);
    CHECK(res.out.find("pubdyn\t32\t1\tclient_verify") != std::string::npos);
}

TEST_CASE("mock curve is available for fast protocol checks") {
    TmpDir tmp;
    std::string dir = (tmp.path / "m").string();
    REQUIRE(run("setup --protocol ckzg --state-dir " + dir +
                " --degree 16 --curve mock --lhe-bits 768 --seed 90")
                .code == 0);
    auto eval = run("eval --state-dir " + dir + " --seed 91");
    REQUIRE(eval.code == 0);
}
