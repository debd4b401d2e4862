#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "lorenzlab/core.hpp"
#include "lorenzlab/estimators.hpp"
#include "lorenzlab/excursions.hpp"
#include "lorenzlab/fokker_planck.hpp"
#include "lorenzlab/lyapunov.hpp"
#include "lorenzlab/sde.hpp"
#include "lorenzlab/theory_checks.hpp"
#include "lorenzlab/threshold.hpp"

namespace lorenzlab {

// Insertion-ordered, so dumps are byte-stable.
using Json = nlohmann::ordered_json;

// params, derived constants, seed, tool version, command
Json provenance(const Params& p, std::uint64_t seed, const std::string& command);

Json to_json(const Params& p);
Json to_json(const DerivedConsts& c);
Json to_json(const State& s);
Json to_json(const SimConfig& c);
Json to_json(const RunSummary& s);
Json to_json(const EstimateWithCI& e);
Json to_json(const ThresholdResult& r);
Json to_json(const Grid2D& g);
Json to_json(const PoissonDiagnostics& d);
Json to_json(const LyapConstants& k);
Json to_json(const DriftReport& r);
Json to_json(const StopTimeReport& r);
Json to_json(const ExpGrowthReport& r);
Json to_json(const TrackingReport& r);
Json to_json(const UnstableReport& r);
Json to_json(const CrossingReport& r);
Json to_json(const TrackingGridReport& r);
Json to_json(const CrossingSweep& s);

// Two-space indent plus a trailing newline.
std::string dump(const Json& j);

// Copy with every "wall_time_s" member removed, recursively.
Json strip_wall_time(Json j);

// Throws InvalidParameter if the file cannot be written.
void write_text(const std::string& path, const std::string& text);

}  // namespace lorenzlab
