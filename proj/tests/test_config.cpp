#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <string>

#include "physvac/config.hpp"
#include "physvac/io.hpp"

using namespace physvac;

TEST_CASE("defaults from an empty document") {
  const auto c = parse_config("");
  CHECK(c.gamma == 2.0);
  CHECK(c.mass == 1.0);
  CHECK(c.n_cells == 200);
  CHECK(c.epsilon == 1e-3);
  CHECK(c.horizon == 1000.0);
  CHECK(c.grading == Grading::boundary_graded);
  CHECK(c.cfl == 0.5);
}

TEST_CASE("invariant violations name the field and bound") {
  try {
    parse_config("gamma = 0.9\n");
    FAIL("expected rejection");
  } catch (const config_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("gamma") != std::string::npos);
    CHECK(msg.find("> 1") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("n_cells = 8\n"), config_error);
  CHECK_THROWS_AS(parse_config("cfl = 1.5\n"), config_error);
  CHECK_THROWS_AS(parse_config("horizon = 0.1\n"), config_error);
}

TEST_CASE("well-formedness") {
  CHECK_THROWS_AS(parse_config("gamma = 2\ngamma = 3\n"), config_error);
  try {
    parse_config("mystery_knob = 1\n");
    FAIL("expected rejection");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("mystery_knob") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("gamma\n"), config_error);
  CHECK_THROWS_AS(parse_config("gamma = abc\n"), config_error);

  // comments, blank lines, lists
  const auto c = parse_config(
      "# a comment\n\ngamma = 3  # trailing\nshape = 1, -0.5, 0.25\n"
      "grading = uniform\n");
  CHECK(c.gamma == 3.0);
  CHECK(c.grading == Grading::uniform);
  REQUIRE(c.shape.size() == 3);
  CHECK(c.shape[1] == -0.5);
}

TEST_CASE("echo round-trips") {
  RunConfig c;
  c.gamma = 1.75;
  c.n_cells = 321;
  c.shape = {1.0, -2.0, 0.125};
  c.sweep_gammas = {1.5, 3.0};
  c.output_dir = "somewhere";
  const auto c2 = parse_config(config_echo(c));
  CHECK(c2.gamma == c.gamma);
  CHECK(c2.n_cells == c.n_cells);
  CHECK(c2.shape == c.shape);
  CHECK(c2.sweep_gammas == c.sweep_gammas);
  CHECK(c2.output_dir == c.output_dir);
}

TEST_CASE("csv round trip") {
  const auto path = std::filesystem::temp_directory_path() /
                    "physvac_test_roundtrip.csv";
  {
    CsvWriter w(path, {"a", "b"});
    w.row({1.0, -0.125});
    w.row({3.0e-17, 2.724069927426661});
  }
  const auto t = read_csv(path);
  REQUIRE(t.header.size() == 2);
  CHECK(t.header[1] == "b");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][0] == 1.0);
  CHECK(t.rows[1][0] == 3.0e-17);
  CHECK(t.rows[1][1] == 2.724069927426661);
  CHECK(t.col("b")[0] == -0.125);
  CHECK_THROWS(t.col("missing"));
  std::filesystem::remove(path);
}
