#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "noncelab/errors.hpp"
#include "run_config.hpp"

using namespace noncelab;
using noncelab::cli::RunConfig;

TEST(RunConfig, DefaultsAndOverrides) {
  RunConfig c;
  EXPECT_EQ(c.str("curve"), "secp521r1");
  EXPECT_NEAR(c.real("sim.mod_ratio"), 1.0 / 14, 1e-15);
  c.set("sim.noise_sigma", "2.5");
  EXPECT_EQ(c.real("sim.noise_sigma"), 2.5);
  EXPECT_TRUE(c.explicitly_set("sim.noise_sigma"));
  EXPECT_FALSE(c.explicitly_set("seed"));
  EXPECT_THROW(c.set("sim.nosie_sigma", "1"), ConfigError);
}

TEST(RunConfig, FileThenFlags) {
  const auto path = std::filesystem::temp_directory_path() / "noncelab_run_config.txt";
  {
    std::ofstream f(path);
    f << "# comment\ncurve = secp128r1\nseed = 9  # trailing\nexperiment.error_rates = 0, 0.05,0.1\n";
  }
  RunConfig c;
  c.load_file(path.string());
  EXPECT_EQ(c.str("curve"), "secp128r1");
  EXPECT_EQ(c.u64("seed"), 9u);
  EXPECT_EQ(c.reals("experiment.error_rates"), (std::vector<double>{0, 0.05, 0.1}));
  c.set("seed", "10");
  EXPECT_EQ(c.u64("seed"), 10u);
  EXPECT_EQ(c.curve().name(), "secp128r1");
  {
    std::ofstream f(path);
    f << "bogus.key = 1\n";
  }
  RunConfig d;
  EXPECT_THROW(d.load_file(path.string()), ConfigError);
  {
    std::ofstream f(path);
    f << "just words\n";
  }
  EXPECT_THROW(d.load_file(path.string()), ConfigError);
}

TEST(RunConfig, TypedAccessRejectsGarbage) {
  RunConfig c;
  c.set("seed", "-1");
  EXPECT_THROW(c.u64("seed"), ConfigError);
  c.set("sim.noise_sigma", "abc");
  EXPECT_THROW(c.real("sim.noise_sigma"), ConfigError);
  c.set("sim.event_markers", "maybe");
  EXPECT_THROW(c.flag("sim.event_markers"), ConfigError);
}

TEST(RunConfig, SimConfigAndInterference) {
  RunConfig c;
  c.set("sim.interference", "0.1:0.2:5; 0.5:0.1:3");
  const SimConfig s = c.sim();
  ASSERT_EQ(s.interference.size(), 2u);
  EXPECT_EQ(s.interference[1].amplitude, 3);
  c.set("sim.sample_rate", "100000");
  EXPECT_THROW(c.sim(), ConfigError);
  c.set("sim.sample_rate", "2500000");
  c.set("sim.interference", "0.1:0.2");
  EXPECT_THROW(c.sim(), ConfigError);
}

TEST(RunConfig, DumpIsSortedAndComplete) {
  RunConfig c;
  c.set("variant", "masked");
  const std::string dump = c.dump();
  EXPECT_NE(dump.find("variant = masked\n"), std::string::npos);
  EXPECT_EQ(dump.find("out ="), std::string::npos);
  EXPECT_LT(dump.find("analysis."), dump.find("variant"));
}
