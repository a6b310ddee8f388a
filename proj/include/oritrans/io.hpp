#pragma once

#include "oritrans/calibration.hpp"
#include "oritrans/coefficients.hpp"
#include "oritrans/currents.hpp"
#include "oritrans/mailing.hpp"
#include "oritrans/solvers.hpp"
#include "oritrans/steiner.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace oritrans {

using Json = nlohmann::json;

// Rationals are written as integers when they fit, as "p/q" strings otherwise.
// Strings, integers and floating-point numbers are all accepted.
Rational rational_from_json(const Json& j);
Json rational_to_json(const Rational& q);
Point point_from_json(const Json& j);
Json point_to_json(const Point& p);

PhiNorm phi_from_json(const Json& j);
Alpha alpha_from_json(const Json& j);
NormSpec norm_from_json(const Json& j);
Json norm_to_json(const NormSpec& spec);

struct SolverConfig {
  std::string method = "auto";  // auto | topology | lattice_family | lattice_current
  std::size_t max_steiner = 1;
  std::optional<LatticeGrid> grid;
};

struct InstanceFile {
  std::string kind;  // "mailing" or "steiner"
  std::optional<MailingInstance> mailing;
  std::optional<PartitionedInstance> steiner;
  std::optional<PairOrdering> ordering;  // mailing only
  NormSpec norm;
  SolverConfig solver;
};

InstanceFile instance_from_json(const Json& j);
Json instance_to_json(const InstanceFile& inst);

PolyCurrent1 current_from_json(const Json& j);
Json current_to_json(const PolyCurrent1& t);
AtomicMeasure0 measure_from_json(const Json& j);
Json measure_to_json(const AtomicMeasure0& b);
PathFamily family_from_json(const Json& j, const MailingInstance& inst);
Json family_to_json(const PathFamily& f);
Forest forest_from_json(const Json& j);
Json forest_to_json(const Forest& f);
CalibrationCertificate certificate_from_json(const Json& j);
Json certificate_to_json(const CalibrationCertificate& c);
std::vector<Segment> support_from_json(const Json& j);
Json support_to_json(const std::vector<Segment>& s);

Json calibration_report_to_json(const CalibrationReport& r, const NormSpec& spec);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Planar drawing of the points and the oriented, labelled atoms of t. Points
// of dimension 3 are projected to their first two coordinates.
std::string render_svg(const std::vector<Point>& points, const PolyCurrent1& t, const std::string& title);

// One row per atom: endpoints, length, theta^-, theta^+ (sums of negative and
// positive entries) and the atom's cost density times length.
std::string atoms_csv(const PolyCurrent1& t, const std::function<double(const Coef&)>& density);

}  // namespace oritrans
