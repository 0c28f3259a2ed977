#include "doctest.h"

#include "aniso/config.hpp"

#include <cstdio>
#include <fstream>

using namespace aniso;

TEST_CASE("config parsing") {
  const Config c = Config::from_string(
      "# trainer settings\n"
      "workers = 4\n"
      "lambda=0.1   # inline comment\n"
      "potential = log_sep:eta=2\n"
      "\n"
      "layers = 2, 16, 2\n");
  CHECK(c.get_int("workers") == 4);
  CHECK(c.get_double("lambda") == doctest::Approx(0.1));
  CHECK(c.get_str("potential") == "log_sep:eta=2");
  CHECK(c.get_list("layers") == std::vector<double>{2, 16, 2});
  CHECK(c.get_str_list("layers") == std::vector<std::string>{"2", "16", "2"});
  CHECK_FALSE(c.has("sigma"));
  CHECK(c.get_double("sigma", 0.05) == doctest::Approx(0.05));
  CHECK(c.get_bool("verbose", false) == false);
}

TEST_CASE("config errors carry line numbers and key names") {
  CHECK_THROWS_WITH_AS(Config::from_string("a=1\nnot a pair\n"),
                       doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_WITH_AS(Config::from_string("=3\n"), doctest::Contains("line 1"),
                       ConfigError);

  const Config c = Config::from_string("x=abc\nflag=maybe\n");
  CHECK_THROWS_WITH_AS(c.get_double("x"), doctest::Contains("x"), ConfigError);
  CHECK_THROWS_WITH_AS(c.get_int("x"), doctest::Contains("x"), ConfigError);
  CHECK_THROWS_WITH_AS(c.get_bool("flag", true), doctest::Contains("flag"), ConfigError);
  CHECK_THROWS_WITH_AS(c.get_str("missing"), doctest::Contains("missing"), ConfigError);
}

TEST_CASE("overrides replace file values") {
  Config c = Config::from_string("lambda=0.1\nworkers=4\n");
  c.apply_override("lambda=0.5");
  c.apply_override("seed=7");
  CHECK(c.get_double("lambda") == doctest::Approx(0.5));
  CHECK(c.get_int("seed") == 7);
  CHECK_THROWS_AS(c.apply_override("nonsense"), ConfigError);
  CHECK_THROWS_AS(c.apply_override("=3"), ConfigError);
}

TEST_CASE("unknown keys are rejected against a schema") {
  const Config c = Config::from_string("workers=2\ntypo_key=1\n");
  CHECK_THROWS_WITH_AS(c.require_known({"workers", "lambda"}),
                       doctest::Contains("typo_key"), ConfigError);
  CHECK_NOTHROW(Config::from_string("workers=2\n").require_known({"workers"}));
}

TEST_CASE("emit round trip is canonical") {
  const Config c = Config::from_string("b=2\na=1\n# comment\n");
  CHECK(c.emit() == "a=1\nb=2\n");
  CHECK(Config::from_string(c.emit()) == c);
}

TEST_CASE("config file loading") {
  const std::string path = "test_config_tmp.cfg";
  {
    std::ofstream out(path);
    out << "alpha=1.5\n";
  }
  CHECK(Config::from_file(path).get_double("alpha") == doctest::Approx(1.5));
  std::remove(path.c_str());
  CHECK_THROWS_AS(Config::from_file("no_such_file.cfg"), ConfigError);
}
