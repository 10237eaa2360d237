#include "helpers.hpp"

#include <filesystem>
#include <fstream>
#include <limits>

#include "ioid/io.hpp"

using namespace ioid;
using namespace ioid::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ioid_unit_io";
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST_SUITE("io") {
TEST_CASE("shortest round-trip formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  Rng rng(70);
  for (int i = 0; i < 1000; ++i) {
    const double v = random_normal(rng, 1, 1)(0) * std::pow(10.0, uniform(rng, -20, 20));
    CHECK(parse_double(format_double(v), "v") == v);
  }
  CHECK_THROWS_AS(parse_double("1.5x", "field"), ValidationError);
  CHECK_THROWS_AS(parse_double("", "field"), ValidationError);
}

TEST_CASE("model JSON round-trips exactly") {
  Rng rng(71);
  const IOModel m = random_stable_model(rng, 2, 2, 3);
  const IOModel back = model_from_json(json::parse(model_to_json(m).dump()));
  CHECK((back.theta() - m.theta()).norm() == 0.0);
  const fs::path p = scratch("model.json");
  save_model(p, m);
  CHECK((load_model(p).theta() - m.theta()).norm() == 0.0);
}

TEST_CASE("model JSON diagnostics name the field") {
  auto message = [](const std::string& text) {
    try {
      model_from_json(json::parse(text));
    } catch (const ValidationError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message(R"({"n":1,"p":1,"m":1,"F":[[[0.5]]],"G":[[[1]]]})").find("model.G") != std::string::npos);
  CHECK(message(R"({"n":1,"p":1,"m":1,"F":[[[0.5]]],"G":[[[1]],[[1, 2]]]})").find("G") != std::string::npos);
  CHECK(message(R"({"n":1,"p":1,"m":1,"F":[[["x"]]],"G":[[[1]],[[1]]]})").find("model.F[0][0][0]") != std::string::npos);
  CHECK(message(R"({"n":1,"p":1,"m":1,"F":[[[0.5]]],"G":[[[1]],[[1]]],"extra":1})").find("unknown key") != std::string::npos);
  CHECK(message(R"({"p":1,"m":1,"F":[],"G":[[[1]]]})").find("model.n") != std::string::npos);
}

TEST_CASE("trajectory CSV round-trips and marks missing leading inputs") {
  Rng rng(72);
  Trajectory t = simulate(random_stable_model(rng, 2, 2, 1), {Vector::Ones(2), Vector::Zero(2)},
                          random_inputs(rng, 30, 1), 30);
  t.k0 = 100;
  t.input_start = 2;
  t.u[0].setConstant(NAN);
  t.u[1].setConstant(NAN);
  const fs::path p = scratch("traj.csv");
  write_trajectory_csv(p, t);
  const Trajectory back = read_trajectory_csv(p);
  CHECK(back.k0 == 100);
  CHECK(back.input_start == 2);
  REQUIRE(back.size() == 30);
  for (std::size_t k = 2; k < 30; ++k) {
    CHECK((back.u[k] - t.u[k]).norm() == 0.0);
  }
  for (std::size_t k = 0; k < 30; ++k) CHECK((back.y[k] - t.y[k]).norm() == 0.0);
  CHECK(trajectory_to_csv(back) == trajectory_to_csv(t));
}

TEST_CASE("trajectory CSV validation") {
  const fs::path p = scratch("bad.csv");
  write(p, "k,u_1,y_1\n0,1,2\n2,1,2\n");
  CHECK_THROWS_AS(read_trajectory_csv(p), ValidationError);
  write(p, "k,y_1,u_1\n0,1,2\n");
  CHECK_THROWS_AS(read_trajectory_csv(p), ValidationError);
  write(p, "k,u_1,y_1\n0,1,2\n1,,2\n");
  CHECK_THROWS_AS(read_trajectory_csv(p), ValidationError);
  write(p, "k,u_1,y_1\n0,1\n");
  CHECK_THROWS_AS(read_trajectory_csv(p), ValidationError);
  write(p, "k,u_1,y_1\n0,abc,2\n");
  CHECK_THROWS_AS(read_trajectory_csv(p), ValidationError);
  CHECK_THROWS_AS(read_trajectory_csv(scratch("missing.csv")), ValidationError);
  write(p, "k,u_1,u_2,y_1\r\n5,1,2,3\r\n6,4,5,6\r\n");
  const Trajectory t = read_trajectory_csv(p);
  CHECK(t.m() == 2);
  CHECK(t.p() == 1);
  CHECK(t.k0 == 5);
  CHECK(t.u[1](1) == 5.0);
}
}
