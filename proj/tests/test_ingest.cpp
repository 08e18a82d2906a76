#include <doctest.h>

#include <cmath>

#include "ftdf/error.hpp"
#include "ftdf/ingest.hpp"
#include "scratch.hpp"

using namespace ftdf;

namespace {

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an ftdf::Error");
    return Errc::InvalidConfig;
}

}  // namespace

TEST_CASE("load_trace parses timestamp,power rows") {
    ScratchDir dir("ingest");
    spit(dir / "a.csv", "0,100.0\n1,100.0\n");
    auto t = load_trace(dir / "a.csv", {}, 2.0, "fridge");
    CHECK(t.samples == std::vector<double>{100.0, 100.0});
    CHECK(t.fs == 2.0);
    CHECK(t.label == "fridge");
}

TEST_CASE("load_trace reports the line of a malformed row") {
    ScratchDir dir("ingest");
    spit(dir / "bad.csv", "0,1\n1,2\n2,abc\n");
    try {
        load_trace(dir / "bad.csv", {}, 1.0, "x");
        FAIL("no throw");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::MalformedRow);
        REQUIRE(e.position());
        CHECK(*e.position() == 3);
    }
}

TEST_CASE("load_trace error cases") {
    ScratchDir dir("ingest");
    spit(dir / "empty.csv", "");
    CHECK(code_of([&] { load_trace(dir / "empty.csv", {}, 1.0, "x"); }) == Errc::EmptyTrace);
    spit(dir / "header_only.csv", "t,power\n");
    CHECK(code_of([&] { load_trace(dir / "header_only.csv", {}, 1.0, "x"); }) == Errc::EmptyTrace);
    CHECK(code_of([&] { load_trace(dir / "missing.csv", {}, 1.0, "x"); }) == Errc::FileNotFound);
    spit(dir / "nan.csv", "0,1\n1,nan\n");
    CHECK(code_of([&] { load_trace(dir / "nan.csv", {}, 1.0, "x"); }) == Errc::NonFiniteSample);
    spit(dir / "short.csv", "0,1\n2\n");
    CHECK(code_of([&] { load_trace(dir / "short.csv", {}, 1.0, "x"); }) == Errc::MalformedRow);
}

TEST_CASE("load_trace handles headers, blank lines and other layouts") {
    ScratchDir dir("ingest");
    spit(dir / "h.csv", "time,watts\n\n0,5\n1,6\n\n");
    CHECK(load_trace(dir / "h.csv", {}, 1.0, "x").samples == std::vector<double>{5, 6});

    TraceSchema semi{';', 0, std::nullopt, 0.5};
    spit(dir / "s.csv", "10;x\n20;y\n");
    CHECK(load_trace(dir / "s.csv", semi, 1.0, "x").samples == std::vector<double>{5, 10});

    TraceSchema ws{' ', 1, 0, 1.0};
    spit(dir / "w.txt", "0   1.5\n1\t2.5\n");
    CHECK(load_trace(dir / "w.txt", ws, 1.0, "x").samples == std::vector<double>{1.5, 2.5});
}

TEST_CASE("write_trace round-trips exactly") {
    ScratchDir dir("ingest");
    PowerTrace t{{0.1, 1e-17, 123456.789, -3.0}, 1.0, "x", "id"};
    write_trace(dir / "t.csv", t);
    CHECK(load_trace(dir / "t.csv", {}, 1.0, "x").samples == t.samples);
}

TEST_CASE("decimate") {
    PowerTrace t{{1, 3, 5, 7}, 4.0, "x", "id"};
    auto d = decimate(t, 2);
    CHECK(d.samples == std::vector<double>{2, 6});
    CHECK(d.fs == 2.0);
    CHECK(decimate(t, 1).samples == t.samples);
    CHECK(decimate(t, 1).fs == t.fs);
    CHECK(decimate(PowerTrace{{1, 2, 3}, 1.0, "x", ""}, 2).samples == std::vector<double>{1.5});
    CHECK(code_of([&] { decimate(t, 0); }) == Errc::InvalidFactor);
    CHECK(code_of([&] { decimate(t, 5); }) == Errc::TraceTooShort);
}

TEST_CASE("decimation composes and preserves the block means") {
    auto t = synth_appliance(ApplianceKind::MotorStartup, 240, 1.0, 3);
    auto twice = decimate(decimate(t, 2), 3);
    auto once = decimate(t, 6);
    REQUIRE(twice.size() == once.size());
    for (std::size_t i = 0; i < once.size(); ++i) CHECK(twice.samples[i] == doctest::Approx(once.samples[i]).epsilon(1e-12));
    CHECK(once.fs == doctest::Approx(1.0 / 6));
}

TEST_CASE("synthetic generators are deterministic") {
    for (auto kind : kAllApplianceKinds) {
        auto a = synth_appliance(kind, 10, 1.0, 7);
        auto b = synth_appliance(kind, 10, 1.0, 7);
        CHECK(a.samples == b.samples);
        CHECK(a.label == kind_name(kind));
    }
    CHECK(synth_appliance(ApplianceKind::Ramp, 50, 1.0, 1).samples !=
          synth_appliance(ApplianceKind::Ramp, 50, 1.0, 2).samples);
}

TEST_CASE("noise-free constant trace sits at the base level") {
    auto t = synth_appliance(ApplianceKind::Constant, 30, 1.0, 9, SynthOptions{0.0});
    REQUIRE(t.size() == 30);
    for (double v : t.samples) CHECK(v == kConstantBaseLevel);
}

TEST_CASE("on_off_cycle produces at least two level transitions") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto t = synth_appliance(ApplianceKind::OnOffCycle, 100, 1.0, seed);
        // The on level is at least 150 W and the off level at most 5 W.
        int transitions = 0;
        for (std::size_t i = 1; i < t.size(); ++i)
            if ((t.samples[i] > 75) != (t.samples[i - 1] > 75)) ++transitions;
        CHECK(transitions >= 2);
    }
}

TEST_CASE("every generator output satisfies the trace invariants") {
    for (auto kind : kAllApplianceKinds)
        for (std::uint64_t seed = 0; seed < 20; ++seed)
            for (double noise : {0.0, 1.0, 5.0}) {
                auto t = synth_appliance(kind, 64, 2.0, seed, SynthOptions{noise});
                CHECK(t.size() == 128);
                CHECK_NOTHROW(t.validate());
            }
    CHECK(code_of([] { synth_appliance(ApplianceKind::Ramp, 0.1, 1.0, 0); }) == Errc::InvalidDuration);
}

TEST_CASE("kind names round-trip") {
    for (auto kind : kAllApplianceKinds) CHECK(parse_kind(kind_name(kind)) == kind);
    CHECK_FALSE(parse_kind("toaster"));
}

TEST_CASE("PowerTrace validation") {
    CHECK(code_of([] { PowerTrace{{}, 1.0, "x", ""}.validate(); }) == Errc::EmptyTrace);
    CHECK(code_of([] { PowerTrace{{1.0, INFINITY}, 1.0, "x", ""}.validate(); }) == Errc::NonFiniteSample);
    CHECK(code_of([] { PowerTrace{{1.0}, 0.0, "x", ""}.validate(); }) == Errc::InvalidConfig);
}

TEST_CASE("manifest round trip and dataset loading") {
    ScratchDir dir("manifest");
    std::filesystem::create_directories(dir / "traces");
    write_trace(dir / "traces/a.csv", PowerTrace{{1, 2, 3}, 1.0, "", ""});
    spit(dir / "traces/b.txt", "4;9\n5;8\n");

    DatasetManifest m;
    m.entries.push_back({"traces/a.csv", "fridge", 1.0, {}});
    m.entries.push_back({"traces/b.txt", "kettle", 2.0, TraceSchema{';', 1, std::nullopt, 1.0}});
    write_manifest(dir / "manifest.tsv", m);

    auto back = read_manifest(dir / "manifest.tsv");
    REQUIRE(back.entries.size() == 2);
    CHECK(back.entries[1].schema.delimiter == ';');
    CHECK_FALSE(back.entries[1].schema.timestamp_column);
    CHECK(back.categories() == std::vector<std::string>{"fridge", "kettle"});

    auto traces = load_dataset(back);
    REQUIRE(traces.size() == 2);
    CHECK(traces[0].samples == std::vector<double>{1, 2, 3});
    CHECK(traces[0].source_id == "a");
    CHECK(traces[1].samples == std::vector<double>{9, 8});
    CHECK(traces[1].fs == 2.0);
}

TEST_CASE("manifest validation") {
    DatasetManifest dup;
    dup.entries.push_back({"a.csv", "x", 1.0, {}});
    dup.entries.push_back({"a.csv", "y", 1.0, {}});
    CHECK(code_of([&] { dup.validate(); }) == Errc::InvalidManifest);

    ScratchDir dir("manifest");
    spit(dir / "m.tsv", "version\t2\npath\tlabel\tfs\tdelimiter\tpower_column\ttimestamp_column\n");
    CHECK(code_of([&] { read_manifest(dir / "m.tsv"); }) == Errc::InvalidManifest);
    CHECK(code_of([&] { read_manifest(dir / "none.tsv"); }) == Errc::FileNotFound);
}
