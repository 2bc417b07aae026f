#pragma once

#include "fts/domains/benchmarks.hpp"
#include "fts/domains/motion.hpp"
#include "fts/domains/pickplace.hpp"
#include "fts/domains/tabletop.hpp"
#include "fts/planners.hpp"

#include <string>
#include <variant>

namespace fts::io {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A problem file is one domain description; loading rebuilds the transition
// system and samplers through the domain builders.
struct ProblemFile {
    std::variant<domains::MotionDomain, domains::PickPlaceDomain, domains::Tabletop1DDomain,
                 domains::Tabletop2DDomain>
        domain;
    // Motion problems carry start/goal configurations.
    geom::Vec2 start;
    geom::Vec2 goal;
};

ProblemFile parse_problem(const std::string& text);
std::string format_problem(const ProblemFile& file);
domains::BuiltProblem build_problem(const ProblemFile& file);

ProblemFile problem_file_from_motion(const domains::MotionDomain& d, geom::Vec2 start,
                                     geom::Vec2 goal);
ProblemFile problem_file_from_pickplace(const domains::PickPlaceDomain& d);
ProblemFile problem_file_from_tabletop1d(const domains::Tabletop1DDomain& d);
ProblemFile problem_file_from_tabletop2d(const domains::Tabletop2DDomain& d);

// Plan and report serialization. Reports omit timing by default so a rerun
// with the same seed is byte-identical.
std::string format_plan(const Plan& plan);
Plan parse_plan(const std::string& text, const TransitionSystem& system);

struct ReportOptions {
    bool include_timing = false;
};

std::string format_report(const PlannerResult& result, const PlannerConfig& config,
                          const std::string& algo, const ReportOptions& options = {});

}  // namespace fts::io
