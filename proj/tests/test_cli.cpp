#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oritrans/cli.hpp"
#include "oritrans/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

using namespace oritrans;
namespace fs = std::filesystem;

namespace {

std::string data(const std::string& name) { return std::string(ORITRANS_DATA_DIR) + "/" + name; }

struct Run {
  int code = 0;
  std::string out;
  std::string err;
  Json json() const { return Json::parse(out); }
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("oritrans_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string write(const std::string& name, const Json& j) const {
    std::ofstream(file(name)) << j.dump(2);
    return file(name);
  }

 private:
  fs::path path_;
  static inline int counter_ = 0;
};

}  // namespace

TEST_CASE("solve the square instance") {
  const auto r = run({"solve", data("square_steiner.json")});
  REQUIRE(r.code == kExitOk);
  const auto j = r.json();
  CHECK(j["value"].get<double>() == doctest::Approx(2.0 + 2.0 * std::sqrt(3.0)).epsilon(1e-4));
  CHECK(j["kind"] == "steiner");
  CHECK(j.contains("forest"));
  CHECK(j["budgets"].contains("threads"));
}

TEST_CASE("solve mailing instances") {
  CHECK(run({"solve", data("mailing_empty.json")}).json()["value"].get<double>() == 0.0);
  const auto lattice = run({"solve", data("mailing_lattice.json")});
  REQUIRE(lattice.code == kExitOk);
  CHECK(lattice.json()["value"].get<double>() == 6.0);
  const auto family = run({"solve", data("mailing_lattice.json"), "--method", "lattice_family"});
  CHECK(family.json()["value"].get<double>() == 6.0);
  const auto y = run({"solve", data("mailing_y.json")});
  REQUIRE(y.code == kExitOk);
  CHECK(y.json()["value"].get<double>() < 2.0 * std::sqrt(13.0));
}

TEST_CASE("budget and input errors") {
  CHECK(run({"solve", data("square_steiner.json"), "--budget-terminals", "3"}).code == kExitBudget);
  CHECK(run({"solve", data("mailing_lattice.json"), "--budget-grid", "3"}).code == kExitBudget);
  CHECK(run({"solve", data("does_not_exist.json")}).code == kExitInvalid);
  CHECK(run({"solve"}).code == kExitInvalid);
  CHECK(run({"frobnicate"}).code == kExitInvalid);
  CHECK(run({"solve", data("square_steiner.json"), "--tol", "-1"}).code == kExitInvalid);
  TempDir tmp;
  std::ofstream(tmp.file("bad.json")) << "{ not json";
  CHECK(run({"solve", tmp.file("bad.json")}).code == kExitInvalid);
  const auto unknown = tmp.write("unknown.json", Json{{"kind", "flow"}});
  CHECK(run({"solve", unknown}).code == kExitInvalid);
  CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("verify certificates") {
  const auto ok = run({"verify", data("fermat_certificate.json"), data("fermat_tree.json")});
  CHECK(ok.code == kExitOk);
  CHECK(ok.json()["verdict"] == "CALIBRATED");
  CHECK(ok.json()["mass"].get<double>() == doctest::Approx(3.0));

  TempDir tmp;
  const auto tree = run({"solve", data("square_steiner.json")}).json()["current"];
  const auto tree_file = tmp.write("tree.json", tree);
  const auto zero = run({"verify", data("square_certificates/zero.json"), tree_file});
  CHECK(zero.code == kExitViolated);
  CHECK(zero.json()["verdict"] == "VIOLATED");

  auto bad = read_json_file(data("fermat_certificate.json"));
  bad["cells"][0]["W"] = Json::array({Json::array({1, 2, 3})});
  CHECK(run({"verify", tmp.write("bad.json", bad), data("fermat_tree.json")}).code == kExitInvalid);
}

TEST_CASE("sampled comass can be inconclusive") {
  TempDir tmp;
  Json cert = {{"norm", {{"kind", "phi_alpha"}, {"phi", "l2"}, {"alpha", "1/2"}}},
               {"cells", Json::array({{{"polygon", Json::array()}, {"W", Json::array({Json::array({1, 0}), Json::array({0, 0})})}}})}};
  Json current = {{"m", 2}, {"ring", "int"},
                  {"atoms", Json::array({{{"a", {0, 0}}, {"b", {1, 0}}, {"coef", {1, 0}}}})}};
  const auto r = run({"verify", tmp.write("c.json", cert), tmp.write("t.json", current)});
  CHECK(r.code == kExitInconclusive);
  const auto j = r.json();
  CHECK(j["verdict"] == "INCONCLUSIVE");
  CHECK(j["comass"].contains("statement"));
}

TEST_CASE("convert between families, currents and the relaxed problem") {
  TempDir tmp;
  const auto solved = run({"solve", data("mailing_y.json")}).json();
  const double value = solved["value"].get<double>();
  const auto family_file = tmp.write("family.json", solved["family"]);

  const auto to_current = run({"convert", family_file, "--to", "current", "--instance", data("mailing_y.json")});
  REQUIRE(to_current.code == kExitOk);
  const auto cj = to_current.json();
  CHECK(cj["after"]["energy"].get<double>() == doctest::Approx(value).epsilon(1e-9));
  CHECK(cj.contains("boundary"));
  const auto current_file = tmp.write("current.json", cj["object"]);

  const auto back = run({"convert", current_file, "--to", "family", "--instance", data("mailing_y.json")});
  REQUIRE(back.code == kExitOk);
  CHECK(back.json()["after"]["energy"].get<double>() == doctest::Approx(value).epsilon(1e-9));

  const auto relaxed = run({"convert", current_file, "--to", "relaxed", "--instance", data("mailing_y.json")});
  REQUIRE(relaxed.code == kExitOk);
  const auto rj = relaxed.json();
  CHECK(rj["after"]["mass"].get<double>() == doctest::Approx(value).epsilon(1e-9));
  const auto relaxed_file = tmp.write("relaxed.json", rj["object"]);

  const auto projected = run({"convert", relaxed_file, "--to", "projected", "--instance", data("mailing_y.json")});
  REQUIRE(projected.code == kExitOk);
  CHECK(projected.json()["after"]["energy"].get<double>() == doctest::Approx(value).epsilon(1e-9));

  // A forest of the Steiner problem becomes its tree current.
  const auto forest_file = tmp.write("forest.json", run({"solve", data("square_steiner.json")}).json()["forest"]);
  const auto from_forest = run({"convert", forest_file, "--to", "current", "--instance", data("square_steiner.json")});
  REQUIRE(from_forest.code == kExitOk);
}

TEST_CASE("convert rejects mismatched objects") {
  TempDir tmp;
  Json loop = {{"m", 9}, {"ring", "int"}, {"atoms", Json::array()}};
  const std::vector<std::pair<std::array<int, 2>, std::array<int, 2>>> square{
      {{5, 5}, {6, 5}}, {{6, 5}, {6, 6}}, {{6, 6}, {5, 6}}, {{5, 6}, {5, 5}}};
  const auto y = run({"solve", data("mailing_y.json")}).json();
  for (const auto& atom : y["current"]["atoms"]) loop["atoms"].push_back(atom);
  for (const auto& [a, b] : square) {
    loop["atoms"].push_back({{"a", a}, {"b", b}, {"coef", {0, 0, 1, 0, 0, 0, 0, 0, 0}}});
  }
  const auto file = tmp.write("loop.json", loop);
  CHECK(run({"convert", file, "--to", "relaxed", "--instance", data("mailing_y.json")}).code == kExitInvalid);
  const auto cleaned = run({"convert", file, "--to", "relaxed", "--instance", data("mailing_y.json"), "--remove-cycles"});
  REQUIRE(cleaned.code == kExitOk);
  CHECK(cleaned.json()["dropped_cycle_length"].get<double>() == doctest::Approx(4.0));
  CHECK(run({"convert", file, "--to", "relaxed", "--instance", data("mailing_lattice.json")}).code == kExitInvalid);
  CHECK(run({"convert", data("fermat_tree.json"), "--to", "relaxed"}).code == kExitInvalid);
}

TEST_CASE("relax on fixed supports") {
  const auto r = run({"relax", data("square_steiner.json"), data("square_support.json")});
  REQUIRE(r.code == kExitOk);
  const auto j = r.json();
  CHECK(j["value"].get<double>() == doctest::Approx(4.0).epsilon(1e-4));
  CHECK(j["gap"].get<double>() == doctest::Approx(2.0 * std::sqrt(3.0) - 2.0).epsilon(1e-4));
  CHECK(run({"relax", data("square_steiner.json"), data("square_diagonals.json")}).json()["value"].get<double>() ==
        doctest::Approx(4.0 * std::sqrt(2.0)).epsilon(1e-4));
  CHECK(run({"relax", data("square_steiner.json"), data("square_disconnected.json")}).code == kExitInvalid);
}

TEST_CASE("written results re-evaluate to the reported value") {
  TempDir tmp;
  const auto out = tmp.file("result.json");
  const auto svg = tmp.file("result.svg");
  const auto csv = tmp.file("result.csv");
  REQUIRE(run({"solve", data("square_steiner.json"), "-o", out, "--svg", svg, "--csv", csv}).code == kExitOk);
  const auto j = read_json_file(out);
  const auto t = current_from_json(j["current"]);
  CHECK(mass(t, NormSpec::linf()) == doctest::Approx(j["value"].get<double>()).epsilon(1e-9));
  CHECK(fs::file_size(svg) > 0);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("atom,", 0) == 0);
}

TEST_CASE("repeated runs print identical output") {
  const auto a = run({"solve", data("square_steiner.json")});
  const auto b = run({"solve", data("square_steiner.json")});
  CHECK(a.out == b.out);
  const auto c = run({"solve", data("mailing_y.json"), "--seed", "5"});
  const auto d = run({"solve", data("mailing_y.json"), "--seed", "5"});
  CHECK(c.out == d.out);
}
