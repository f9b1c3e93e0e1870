#include "qpump/config.hpp"

#include "support/test_models.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace qpump;
using namespace qpump::testing;

namespace {
const std::string kConfigDir = QPUMP_CONFIG_DIR;
}

TEST_CASE("bundled configs parse and instantiate", "[config]") {
  SECTION("xy3.json matches the programmatic model") {
    const ModelConfig config = parse_config_file(kConfigDir + "/xy3.json");
    const PumpModel model = instantiate(config);
    const PumpModel reference = make_xy3();
    REQUIRE(model.dims == reference.dims);
    REQUIRE(model.beta == reference.beta);
    CHECK(model.tau == reference.tau);
    for (int j = 0; j < 3; ++j)
      CHECK((model.local_h[static_cast<size_t>(j)] -
             reference.local_h[static_cast<size_t>(j)])
                .norm() == 0.0);
    REQUIRE(model.interaction.size() == 1);
    CHECK((model.interaction[0].v - reference.interaction[0].v).norm() == 0.0);
    CHECK(validate(model).all_passed());
  }
  SECTION("exchange2.json validates") {
    const PumpModel model =
        instantiate(parse_config_file(kConfigDir + "/exchange2.json"));
    CHECK(validate(model).all_passed());
    CHECK(model.subsystem_count() == 2);
  }
  SECTION("nonconserving2.json fails only the conservation check") {
    const PumpModel model =
        instantiate(parse_config_file(kConfigDir + "/nonconserving2.json"));
    const ValidationReport report = validate(model);
    CHECK_FALSE(report.all_passed());
    CHECK(report.passed(ConservationPolicy::Warn));
  }
}

TEST_CASE("parameter substitution", "[config]") {
  const ModelConfig config = parse_config_file(kConfigDir + "/xy3.json");
  SECTION("defaults apply, overrides shadow them") {
    CHECK(referenced_parameters(config) == std::set<std::string>{"omega"});
    const PumpModel with_default = instantiate(config);
    CHECK(std::abs(with_default.local_h[0](0, 0) - Complex(1.0, 0.0)) == 0.0);
    const PumpModel overridden = instantiate(config, {{"omega", 2.5}});
    CHECK(std::abs(overridden.local_h[0](0, 0) - Complex(2.5, 0.0)) == 0.0);
  }
  SECTION("a symbolic coefficient with no value is an error") {
    ModelConfig broken = config;
    broken.parameters.clear();
    CHECK_THROWS_AS(instantiate(broken), ParseError);
  }
}

TEST_CASE("config parse errors carry a location", "[config]") {
  SECTION("invalid JSON") {
    CHECK_THROWS_AS(parse_config("{ not json"), ParseError);
  }
  SECTION("missing fields name the path") {
    try {
      parse_config(R"({"subsystems": [{"dim": 2, "beta": 1.0}], "tau": 1.0})");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("subsystems[0]") != std::string::npos);
      CHECK(std::string(e.what()).find("hamiltonian") != std::string::npos);
    }
  }
  SECTION("ragged matrices are rejected") {
    const std::string text = R"({
      "subsystems": [{"dim": 2, "beta": 1.0,
                      "hamiltonian": {"matrix": [[[1,0],[0,0]], [[0,0]]]}}],
      "tau": 0.5})";
    CHECK_THROWS_AS(parse_config(text), ParseError);
  }
  SECTION("unknown pauli labels and bad policies are rejected") {
    CHECK_THROWS_AS(parse_config(R"({
      "subsystems": [{"dim": 2, "beta": 1.0,
                      "hamiltonian": {"terms": [{"coeff": 1.0, "pauli": "W"}]}}],
      "tau": 1.0})"),
                    ParseError);
    CHECK_THROWS_AS(parse_config(R"({
      "subsystems": [{"dim": 2, "beta": 1.0,
                      "hamiltonian": {"terms": []}}],
      "tau": 1.0, "options": {"conservation": "ignore"}})"),
                    ParseError);
  }
  SECTION("missing file") {
    CHECK_THROWS_AS(parse_config_file(kConfigDir + "/does_not_exist.json"),
                    ParseError);
  }
}

TEST_CASE("dump round-trips to an identical model", "[config]") {
  const PumpModel original =
      instantiate(parse_config_file(kConfigDir + "/xy3.json"), {{"omega", 1.7}});
  const std::string dumped = dump_model(original).dump(2);
  const PumpModel reparsed = instantiate(parse_config(dumped));

  REQUIRE(reparsed.dims == original.dims);
  REQUIRE(reparsed.beta == original.beta);
  CHECK(reparsed.tau == original.tau);
  CHECK(reparsed.options.merge_tol == original.options.merge_tol);
  CHECK(reparsed.options.drop_tol == original.options.drop_tol);
  CHECK(reparsed.options.conservation == original.options.conservation);
  for (size_t j = 0; j < original.local_h.size(); ++j)
    CHECK((reparsed.local_h[j] - original.local_h[j]).norm() == 0.0);
  REQUIRE(reparsed.interaction.size() == original.interaction.size());
  for (size_t s = 0; s < original.interaction.size(); ++s) {
    CHECK(reparsed.interaction[s].duration == original.interaction[s].duration);
    CHECK((reparsed.interaction[s].v - original.interaction[s].v).norm() == 0.0);
  }
  // the normal form is a fixed point
  CHECK(dump_model(reparsed).dump(2) == dumped);
}
