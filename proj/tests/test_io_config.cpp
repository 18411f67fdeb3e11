#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "gkdv/config.hpp"
#include "gkdv/io.hpp"
#include "gkdv/lab.hpp"
#include "gkdv/random.hpp"

using namespace gkdv;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("gkdv-test-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

}  // namespace

TEST(Io, FieldRoundTripIsBitExact) {
    const GridSpec g(64, 10.0);
    const Field f = band_limited_noise(g, {1.0, 0.5, 3.0, 0.0, 2.0}, 2);
    const auto dir = scratch("field");
    io::write_field(dir / "f.csv", f, 1.25);
    double t = 0.0;
    const Field back = io::read_field(dir / "f.csv", &t);
    EXPECT_EQ(t, 1.25);
    for (std::size_t j = 0; j < g.n(); ++j) EXPECT_EQ(back[j], f[j]);
}

TEST(Io, TrajectoryRoundTrip) {
    const GridSpec g(32, 10.0);
    const auto traj = airy_evolve(sample(g, [](double x) { return std::exp(-x * x); }), 1.0, 0.25);
    const auto dir = scratch("traj");
    io::write_trajectory(dir, traj);
    const auto back = io::read_trajectory(dir);
    ASSERT_EQ(back.size(), traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        EXPECT_EQ(back.time(i), traj.time(i));
        EXPECT_EQ(l2_norm(back.state(i) - traj.state(i)), 0.0);
    }
    EXPECT_EQ(back.meta().flow, "airy");
}

TEST(Io, CorruptArtifactsAreReported) {
    const auto dir = scratch("corrupt");
    write_text(dir / "bad.csv", "a,b\n1,2\n3\n");
    EXPECT_THROW(io::read_csv(dir / "bad.csv"), io::ArtifactError);
    write_text(dir / "bad2.csv", "a\nxyz\n");
    EXPECT_THROW(io::read_csv(dir / "bad2.csv"), io::ArtifactError);
    write_text(dir / "bad.json", "{not json");
    EXPECT_THROW(io::read_json(dir / "bad.json"), io::ArtifactError);
    EXPECT_THROW(io::read_json(dir / "missing.json"), io::ArtifactError);
}

TEST(Io, ErrorJsonCarriesType) {
    EXPECT_EQ(io::error_json(NumericAbort("x", 2.5))["type"], "NumericAbort");
    EXPECT_EQ(io::error_json(NumericAbort("x", 2.5))["last_time"], 2.5);
    EXPECT_EQ(io::error_json(NoConvergence("x", 1e-3))["type"], "NoConvergence");
    EXPECT_EQ(io::error_json(InvalidArgument("x"))["type"], "InvalidArgument");
}

TEST(Config, ParsesIniAndOverrides) {
    const auto dir = scratch("ini");
    write_text(dir / "c.ini", "[run]\nexperiment = stability\nseed = 11\n[grid]\nn = 256\nlength = 40\n"
                              "[solver]\nsponge = true\nT = 2.5\n[norms]\nbesov_q = inf\n");
    auto cfg = lab::ExperimentConfig::from_file(dir / "c.ini");
    EXPECT_EQ(cfg.run.experiment, "stability");
    EXPECT_EQ(cfg.run.seed, 11u);
    EXPECT_EQ(cfg.grid.n, 256u);
    EXPECT_TRUE(cfg.solver.sponge);
    EXPECT_TRUE(std::isinf(cfg.norms.besov_q));
    cfg.set("solver.dt=0.002");
    EXPECT_EQ(cfg.solver.dt, 0.002);
    EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, RejectsUnknownAndMalformed) {
    const auto dir = scratch("bad-ini");
    write_text(dir / "a.ini", "[grid]\nn = 256\ncolour = blue\n");
    EXPECT_THROW(lab::ExperimentConfig::from_file(dir / "a.ini"), lab::ConfigError);
    write_text(dir / "b.ini", "[grid]\nn = twelve\n");
    EXPECT_THROW(lab::ExperimentConfig::from_file(dir / "b.ini"), lab::ConfigError);
    write_text(dir / "c.ini", "loose = 1\n");
    EXPECT_THROW(lab::ExperimentConfig::from_file(dir / "c.ini"), lab::ConfigError);
    EXPECT_THROW(lab::ExperimentConfig::from_file(dir / "none.ini"), lab::ConfigError);
    lab::ExperimentConfig cfg;
    EXPECT_THROW(cfg.set("solver.sponge=maybe"), lab::ConfigError);
    EXPECT_THROW(cfg.set("no-equals"), lab::ConfigError);
    cfg.set("grid.n=100");
    EXPECT_THROW(cfg.validate(), lab::ConfigError);
    lab::ExperimentConfig other;
    other.run.experiment = "nonsense";
    EXPECT_THROW(other.validate(), lab::ConfigError);
}

TEST(Config, JsonRoundTripReproducesEveryKey) {
    lab::ExperimentConfig a;
    a.set("solver.dt=0.0003");
    a.set("grid.length=77.5");
    a.set("run.seed=99");
    a.set("scatter.cauchy=true");
    lab::ExperimentConfig b;
    b.load_json({{"config", a.to_json()}});
    for (auto& e : a.entries()) EXPECT_EQ(b.get(e.key), e.get()) << e.key;
}

TEST(Lab, SweepExpansionAndThreadCap) {
    lab::ExperimentConfig base;
    base.run.output_dir = "/tmp/sweep-base";
    const auto cfgs = lab::expand_sweep(base, "soliton.c=0.5,1,2");
    ASSERT_EQ(cfgs.size(), 3u);
    EXPECT_EQ(cfgs[2].soliton.c, 2.0);
    EXPECT_EQ(cfgs[0].run.output_dir, "/tmp/sweep-base/soliton.c=0.5");
    EXPECT_THROW(lab::expand_sweep(base, "soliton.c"), lab::ConfigError);
    setenv("GKDV_LAB_THREADS", "2", 1);
    EXPECT_EQ(lab::sweep_threads(5), 2u);
    EXPECT_EQ(lab::sweep_threads(1), 1u);
    setenv("GKDV_LAB_THREADS", "junk", 1);
    EXPECT_GE(lab::sweep_threads(5), 1u);
    unsetenv("GKDV_LAB_THREADS");
}

TEST(Lab, ReportOnMissingDirectoryThrows) {
    const auto dir = scratch("empty-run");
    EXPECT_THROW(lab::report(dir), io::ArtifactError);
    EXPECT_THROW(lab::report(dir / "nope"), io::ArtifactError);
}

TEST(Lab, IdentitiesRunAndReport) {
    lab::ExperimentConfig cfg;
    cfg.run.experiment = "identities";
    cfg.run.output_dir = scratch("identities").string();
    const auto out = lab::run(cfg);
    EXPECT_EQ(out.exit_code, lab::kPass);
    const auto rep = lab::report(cfg.run.output_dir);
    EXPECT_EQ(rep.exit_code, lab::kPass);
    EXPECT_NE(rep.text.find("A = 75/4 - 12Q^3"), std::string::npos);
    EXPECT_TRUE(fs::exists(fs::path(cfg.run.output_dir) / "summary.json"));
}

TEST(Lab, SweepRunsIsolatedDirectories) {
    lab::ExperimentConfig base;
    base.run.experiment = "identities";
    base.run.output_dir = scratch("sweep").string();
    setenv("GKDV_LAB_THREADS", "2", 1);
    std::ostringstream log;
    EXPECT_EQ(lab::sweep(lab::expand_sweep(base, "grid.length=80,90"), log), lab::kPass);
    unsetenv("GKDV_LAB_THREADS");
    EXPECT_TRUE(fs::exists(fs::path(base.run.output_dir) / "grid.length=80" / "checks.json"));
    EXPECT_TRUE(fs::exists(fs::path(base.run.output_dir) / "sweep.json"));
}

TEST(Lab, NumericFailureWritesErrorJson) {
    lab::ExperimentConfig cfg;
    cfg.run.experiment = "inverse";
    cfg.run.output_dir = scratch("inverse-fail").string();
    cfg.grid.n = 256;
    cfg.grid.length = 40.0;
    cfg.perturbation.amplitude = 5.0;  // far from small
    const auto out = lab::run(cfg);
    EXPECT_EQ(out.exit_code, lab::kUsageError);
    EXPECT_TRUE(fs::exists(fs::path(cfg.run.output_dir) / "error.json"));
    const auto rep = lab::report(cfg.run.output_dir);
    EXPECT_NE(rep.exit_code, lab::kPass);
}
