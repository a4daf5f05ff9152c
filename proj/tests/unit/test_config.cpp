#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "dynbo/config.hpp"
#include "dynbo/errors.hpp"

using namespace dynbo;

TEST(Config, ParsesCommentsAndOverrides) {
  const auto c = Config::parse("# defaults\n tracker.budget = 40  # per frame\n\nacq.kind=ei\ntracker.budget = 50\n");
  EXPECT_EQ(c.get_int("tracker.budget", 0), 50);
  EXPECT_EQ(*c.get("acq.kind"), "ei");
  EXPECT_FALSE(c.has("seed"));
  EXPECT_EQ(c.get_double("missing", 1.5), 1.5);
}

TEST(Config, TypedAccessors) {
  const auto c = Config::parse("a = 0.25\nb = 3\nc = yes\nd = 1x\n");
  EXPECT_EQ(c.get_double("a", 0), 0.25);
  EXPECT_EQ(c.get_int("b", 0), 3);
  EXPECT_TRUE(c.get_bool("c", false));
  EXPECT_THROW(c.get_double("d", 0), InvalidArgument);
  EXPECT_THROW(c.get_int("a", 0), InvalidArgument);
  EXPECT_THROW(c.get_bool("b", false), InvalidArgument);
}

TEST(Config, MalformedLine) {
  try {
    Config::parse("a = 1\nno equals sign\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Config, AppliesToSdbtaConfig) {
  auto c = Config::parse(
      "kernel.spatial.family = matern32\nkernel.spatial.lengthscale = 0.3\ngp.noise = 0.001\n"
      "gp.hyper.spatial = 0.1, 0.2\nacq.kind = pi\nacq.q = 1.3\ntracker.budget = 30\ntracker.grid_d = 12\nseed = 9\n");
  const auto s = sdbta_config_from(c);
  EXPECT_EQ(s.gp.kernel.spatial.family, MaternFamily::Matern32);
  EXPECT_EQ(s.gp.kernel.spatial.lengthscale, 0.3);
  EXPECT_EQ(s.gp.noise, 0.001);
  EXPECT_EQ(s.gp.hyper_grid.spatial, (std::vector<double>{0.1, 0.2}));
  EXPECT_EQ(s.acq.kind, AcquisitionKind::PI);
  EXPECT_EQ(s.acq.q, 1.3);
  EXPECT_EQ(s.tracker.budget_per_frame, 30);
  EXPECT_EQ(s.tracker.grid_d, 12);
  EXPECT_EQ(s.seed, 9u);
  EXPECT_FALSE(s.gp.prior_mean);
}

TEST(Config, RejectsUnknownAndInvalid) {
  EXPECT_THROW(sdbta_config_from(Config::parse("tracker.budgte = 3\n")), InvalidArgument);
  EXPECT_THROW(sdbta_config_from(Config::parse("tracker.budget = 0\n")), InvalidArgument);
  EXPECT_THROW(sdbta_config_from(Config::parse("acq.kind = ucb\n")), InvalidArgument);
  EXPECT_THROW(sdbta_config_from(Config::parse("seed = -\n")), InvalidArgument);
}

TEST(Config, MergeLaterWins) {
  auto a = Config::parse("x = 1\ny = 2\n");
  a.merge(Config::parse("y = 3\n"));
  EXPECT_EQ(a.get_int("x", 0), 1);
  EXPECT_EQ(a.get_int("y", 0), 3);
}

TEST(Config, EnvironmentAndFile) {
  const auto path = std::filesystem::temp_directory_path() / ("dynbo_cfg_" + std::to_string(::getpid()) + ".conf");
  std::ofstream(path) << "tracker.window_frames = 4\n";
  ::setenv("DYNBO_CONFIG", path.c_str(), 1);
  ASSERT_TRUE(default_config_path());
  EXPECT_EQ(sdbta_config_from(Config::load(*default_config_path())).tracker.window_frames, 4);
  ::unsetenv("DYNBO_CONFIG");
  EXPECT_FALSE(default_config_path());
  std::filesystem::remove(path);
  EXPECT_THROW(Config::load(path.string()), InvalidArgument);
}
