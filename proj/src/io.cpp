#include "fts/io.hpp"

#include <json.hpp>

#include <set>

namespace fts::io {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object())
        throw ParseError(where + ": expected an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw ParseError(where + ": unknown key '" + key + "'");
}

double get_num(const json& j, const std::string& where) {
    if (!j.is_number())
        throw ParseError(where + ": expected a number");
    return j.get<double>();
}

geom::Vec2 parse_vec(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty() || j.size() > 2)
        throw ParseError(where + ": expected [x] or [x, y]");
    geom::Vec2 v;
    v.x = get_num(j[0], where);
    if (j.size() == 2)
        v.y = get_num(j[1], where);
    return v;
}

json vec_json(geom::Vec2 v, int dimension) {
    if (dimension == 1)
        return json::array({v.x});
    return json::array({v.x, v.y});
}

geom::Box parse_box(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2)
        throw ParseError(where + ": expected [[lo...],[hi...]]");
    return {parse_vec(j[0], where), parse_vec(j[1], where)};
}

json box_json(const geom::Box& b, int dimension) {
    return json::array({vec_json(b.lo, dimension), vec_json(b.hi, dimension)});
}

geom::Shape parse_shape(const json& j, const std::string& where) {
    check_keys(j, {"shape", "radius", "half_extents"}, where);
    std::string kind = j.at("shape").get<std::string>();
    if (kind == "disc")
        return geom::Shape::disc(get_num(j.at("radius"), where));
    if (kind == "box")
        return geom::Shape::box(parse_vec(j.at("half_extents"), where));
    throw ParseError(where + ": unknown shape '" + kind + "'");
}

json shape_json(const geom::Shape& s, int dimension) {
    json j;
    if (s.kind == geom::Shape::Kind::disc) {
        j["shape"] = "disc";
        j["radius"] = s.radius;
    } else {
        j["shape"] = "box";
        j["half_extents"] = vec_json(s.half_extents, dimension);
    }
    return j;
}

std::pair<double, double> parse_interval(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2)
        throw ParseError(where + ": expected [lo, hi]");
    return {get_num(j[0], where), get_num(j[1], where)};
}

// ---- domain parsers ---------------------------------------------------------

domains::MotionDomain parse_motion(const json& j, geom::Vec2* start, geom::Vec2* goal) {
    check_keys(j, {"domain", "dimension", "bounds", "robot", "obstacles", "resolution", "start",
                   "goal"},
               "motion");
    domains::MotionDomain d;
    d.dimension = j.value("dimension", 2);
    if (d.dimension != 1 && d.dimension != 2)
        throw ParseError("motion: dimension must be 1 or 2");
    d.bounds = parse_box(j.at("bounds"), "motion.bounds");
    if (j.contains("robot"))
        d.robot = parse_shape(j.at("robot"), "motion.robot");
    if (j.contains("resolution"))
        d.resolution = get_num(j.at("resolution"), "motion.resolution");
    if (j.contains("obstacles"))
        for (const json& o : j.at("obstacles")) {
            check_keys(o, {"shape", "pose"}, "motion.obstacles[]");
            d.obstacles.push_back(
                {parse_shape(o.at("shape"), "obstacle.shape"), parse_vec(o.at("pose"), "obstacle.pose")});
        }
    *start = parse_vec(j.at("start"), "motion.start");
    *goal = parse_vec(j.at("goal"), "motion.goal");
    return d;
}

json motion_json(const domains::MotionDomain& d, geom::Vec2 start, geom::Vec2 goal) {
    json j;
    j["domain"] = "motion";
    j["dimension"] = d.dimension;
    j["bounds"] = box_json(d.bounds, d.dimension);
    j["robot"] = shape_json(d.robot, d.dimension);
    json obstacles = json::array();
    for (const auto& o : d.obstacles) {
        json oj;
        oj["shape"] = shape_json(o.shape, d.dimension);
        oj["pose"] = vec_json(o.pose, d.dimension);
        obstacles.push_back(oj);
    }
    j["obstacles"] = obstacles;
    j["resolution"] = d.resolution;
    j["start"] = vec_json(start, d.dimension);
    j["goal"] = vec_json(goal, d.dimension);
    return j;
}

domains::PickPlaceDomain parse_pickplace(const json& j) {
    check_keys(j, {"domain", "dimension", "bounds", "robot", "objects", "fixed_obstacles",
                   "resolution", "initial_config", "goal_config"},
               "pickplace");
    domains::PickPlaceDomain d;
    d.dimension = j.value("dimension", 2);
    d.bounds = parse_box(j.at("bounds"), "pickplace.bounds");
    if (j.contains("robot"))
        d.robot = parse_shape(j.at("robot"), "pickplace.robot");
    if (j.contains("resolution"))
        d.resolution = get_num(j.at("resolution"), "pickplace.resolution");
    d.initial_config = parse_vec(j.at("initial_config"), "pickplace.initial_config");
    if (j.contains("goal_config") && !j.at("goal_config").is_null())
        d.goal_config = parse_vec(j.at("goal_config"), "pickplace.goal_config");
    if (j.contains("fixed_obstacles"))
        for (const json& o : j.at("fixed_obstacles")) {
            check_keys(o, {"shape", "pose"}, "pickplace.fixed_obstacles[]");
            d.fixed_obstacles.push_back(
                {parse_shape(o.at("shape"), "obstacle.shape"), parse_vec(o.at("pose"), "obstacle.pose")});
        }
    for (const json& o : j.at("objects")) {
        check_keys(o, {"name", "radius", "initial_pose", "grasps", "surfaces", "goal_region",
                       "goal_pose"},
                   "pickplace.objects[]");
        domains::PickPlaceObject obj;
        obj.name = o.at("name").get<std::string>();
        obj.radius = get_num(o.at("radius"), "object.radius");
        obj.initial_pose = parse_vec(o.at("initial_pose"), "object.initial_pose");
        for (const json& g : o.at("grasps"))
            obj.grasps.push_back(parse_vec(g, "object.grasps[]"));
        for (const json& s : o.at("surfaces"))
            obj.surfaces.push_back(parse_box(s, "object.surfaces[]"));
        if (o.contains("goal_region") && !o.at("goal_region").is_null())
            obj.goal_region = parse_box(o.at("goal_region"), "object.goal_region");
        if (o.contains("goal_pose") && !o.at("goal_pose").is_null())
            obj.goal_pose = parse_vec(o.at("goal_pose"), "object.goal_pose");
        d.objects.push_back(std::move(obj));
    }
    return d;
}

json pickplace_json(const domains::PickPlaceDomain& d) {
    json j;
    j["domain"] = "pickplace";
    j["dimension"] = d.dimension;
    j["bounds"] = box_json(d.bounds, d.dimension);
    j["robot"] = shape_json(d.robot, d.dimension);
    j["resolution"] = d.resolution;
    j["initial_config"] = vec_json(d.initial_config, d.dimension);
    if (d.goal_config)
        j["goal_config"] = vec_json(*d.goal_config, d.dimension);
    json obstacles = json::array();
    for (const auto& o : d.fixed_obstacles) {
        json oj;
        oj["shape"] = shape_json(o.shape, d.dimension);
        oj["pose"] = vec_json(o.pose, d.dimension);
        obstacles.push_back(oj);
    }
    j["fixed_obstacles"] = obstacles;
    json objects = json::array();
    for (const auto& obj : d.objects) {
        json oj;
        oj["name"] = obj.name;
        oj["radius"] = obj.radius;
        oj["initial_pose"] = vec_json(obj.initial_pose, d.dimension);
        json grasps = json::array();
        for (geom::Vec2 g : obj.grasps)
            grasps.push_back(vec_json(g, d.dimension));
        oj["grasps"] = grasps;
        json surfaces = json::array();
        for (const geom::Box& s : obj.surfaces)
            surfaces.push_back(box_json(s, d.dimension));
        oj["surfaces"] = surfaces;
        if (obj.goal_region)
            oj["goal_region"] = box_json(*obj.goal_region, d.dimension);
        if (obj.goal_pose)
            oj["goal_pose"] = vec_json(*obj.goal_pose, d.dimension);
        objects.push_back(oj);
    }
    j["objects"] = objects;
    return j;
}

domains::Tabletop1DDomain parse_tabletop1d(const json& j) {
    check_keys(j, {"domain", "workspace", "tables", "clearance", "objects"}, "tabletop1d");
    domains::Tabletop1DDomain d;
    d.workspace = parse_interval(j.at("workspace"), "tabletop1d.workspace");
    for (const json& t : j.at("tables"))
        d.tables.push_back(parse_interval(t, "tabletop1d.tables[]"));
    d.clearance = get_num(j.at("clearance"), "tabletop1d.clearance");
    for (const json& o : j.at("objects")) {
        check_keys(o, {"name", "initial_pose", "grasps", "placements", "goal_region", "goal_pose"},
                   "tabletop1d.objects[]");
        domains::Tabletop1DObject obj;
        obj.name = o.at("name").get<std::string>();
        obj.initial_pose = get_num(o.at("initial_pose"), "object.initial_pose");
        for (const json& g : o.at("grasps"))
            obj.grasps.push_back(get_num(g, "object.grasps[]"));
        for (const json& p : o.at("placements"))
            obj.placements.push_back(parse_interval(p, "object.placements[]"));
        if (o.contains("goal_region") && !o.at("goal_region").is_null())
            obj.goal_region = parse_interval(o.at("goal_region"), "object.goal_region");
        if (o.contains("goal_pose") && !o.at("goal_pose").is_null())
            obj.goal_pose = get_num(o.at("goal_pose"), "object.goal_pose");
        d.objects.push_back(std::move(obj));
    }
    return d;
}

json tabletop1d_json(const domains::Tabletop1DDomain& d) {
    json j;
    j["domain"] = "tabletop1d";
    j["workspace"] = json::array({d.workspace.first, d.workspace.second});
    json tables = json::array();
    for (const auto& t : d.tables)
        tables.push_back(json::array({t.first, t.second}));
    j["tables"] = tables;
    j["clearance"] = d.clearance;
    json objects = json::array();
    for (const auto& obj : d.objects) {
        json oj;
        oj["name"] = obj.name;
        oj["initial_pose"] = obj.initial_pose;
        oj["grasps"] = obj.grasps;
        json placements = json::array();
        for (const auto& p : obj.placements)
            placements.push_back(json::array({p.first, p.second}));
        oj["placements"] = placements;
        if (obj.goal_region)
            oj["goal_region"] = json::array({obj.goal_region->first, obj.goal_region->second});
        if (obj.goal_pose)
            oj["goal_pose"] = *obj.goal_pose;
        objects.push_back(oj);
    }
    j["objects"] = objects;
    return j;
}

domains::Tabletop2DDomain parse_tabletop2d(const json& j) {
    check_keys(j, {"domain", "workspace", "robot", "tables", "home", "resolution", "objects"},
               "tabletop2d");
    domains::Tabletop2DDomain d;
    d.workspace = parse_box(j.at("workspace"), "tabletop2d.workspace");
    if (j.contains("robot"))
        d.robot = parse_shape(j.at("robot"), "tabletop2d.robot");
    for (const json& t : j.at("tables"))
        d.tables.push_back(parse_box(t, "tabletop2d.tables[]"));
    d.home = parse_vec(j.at("home"), "tabletop2d.home");
    if (j.contains("resolution"))
        d.resolution = get_num(j.at("resolution"), "tabletop2d.resolution");
    for (const json& o : j.at("objects")) {
        check_keys(o, {"name", "radius", "initial_pose", "grasps", "goal_region", "goal_pose"},
                   "tabletop2d.objects[]");
        domains::Tabletop2DObject obj;
        obj.name = o.at("name").get<std::string>();
        obj.radius = get_num(o.at("radius"), "object.radius");
        obj.initial_pose = parse_vec(o.at("initial_pose"), "object.initial_pose");
        for (const json& g : o.at("grasps"))
            obj.grasps.push_back(parse_vec(g, "object.grasps[]"));
        if (o.contains("goal_region") && !o.at("goal_region").is_null())
            obj.goal_region = parse_box(o.at("goal_region"), "object.goal_region");
        if (o.contains("goal_pose") && !o.at("goal_pose").is_null())
            obj.goal_pose = parse_vec(o.at("goal_pose"), "object.goal_pose");
        d.objects.push_back(std::move(obj));
    }
    return d;
}

json tabletop2d_json(const domains::Tabletop2DDomain& d) {
    json j;
    j["domain"] = "tabletop2d";
    j["workspace"] = box_json(d.workspace, 2);
    j["robot"] = shape_json(d.robot, 2);
    json tables = json::array();
    for (const geom::Box& t : d.tables)
        tables.push_back(box_json(t, 2));
    j["tables"] = tables;
    j["home"] = vec_json(d.home, 2);
    j["resolution"] = d.resolution;
    json objects = json::array();
    for (const auto& obj : d.objects) {
        json oj;
        oj["name"] = obj.name;
        oj["radius"] = obj.radius;
        oj["initial_pose"] = vec_json(obj.initial_pose, 2);
        json grasps = json::array();
        for (geom::Vec2 g : obj.grasps)
            grasps.push_back(vec_json(g, 2));
        oj["grasps"] = grasps;
        if (obj.goal_region)
            oj["goal_region"] = box_json(*obj.goal_region, 2);
        if (obj.goal_pose)
            oj["goal_pose"] = vec_json(*obj.goal_pose, 2);
        objects.push_back(oj);
    }
    j["objects"] = objects;
    return j;
}

// ---- values -----------------------------------------------------------------

json value_json(const Value& v) {
    switch (v.kind()) {
    case Value::Kind::real_vec:
        return json(v.as_reals());
    case Value::Kind::symbol:
        return json{{"sym", v.as_symbol()}};
    case Value::Kind::boolean:
        return json(v.as_bool());
    case Value::Kind::trajectory:
        return json{{"traj", v.as_trajectory()}};
    case Value::Kind::lazy:
        throw ParseError("cannot serialize a lazy placeholder");
    }
    return {};
}

Value parse_value(const json& j) {
    if (j.is_boolean())
        return Value::boolean(j.get<bool>());
    if (j.is_array())
        return Value::reals(j.get<std::vector<double>>());
    if (j.is_object()) {
        if (j.contains("sym"))
            return Value::symbol(j.at("sym").get<std::string>());
        if (j.contains("traj"))
            return Value::trajectory(j.at("traj").get<std::vector<std::vector<double>>>());
    }
    throw ParseError("unrecognized value: " + j.dump());
}

json plan_json(const Plan& plan) {
    json j;
    j["skeleton"] = plan.skeleton.clause_names;
    json states = json::array();
    for (const auto& state : plan.states) {
        json sj = json::array();
        for (const Value& v : state)
            sj.push_back(value_json(v));
        states.push_back(sj);
    }
    j["states"] = states;
    json controls = json::array();
    for (const auto& u : plan.controls) {
        json uj = json::array();
        for (const Value& v : u)
            uj.push_back(value_json(v));
        controls.push_back(uj);
    }
    j["controls"] = controls;
    return j;
}

}  // namespace

ProblemFile parse_problem(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& err) {
        throw ParseError(std::string("invalid JSON: ") + err.what());
    }
    if (!j.is_object() || !j.contains("domain"))
        throw ParseError("problem file must be an object with a 'domain' key");
    std::string kind = j.at("domain").get<std::string>();
    ProblemFile file;
    try {
        if (kind == "motion") {
            file.domain = parse_motion(j, &file.start, &file.goal);
        } else if (kind == "pickplace") {
            file.domain = parse_pickplace(j);
        } else if (kind == "tabletop1d") {
            file.domain = parse_tabletop1d(j);
        } else if (kind == "tabletop2d") {
            file.domain = parse_tabletop2d(j);
        } else {
            throw ParseError("unknown domain kind: " + kind);
        }
    } catch (const json::exception& err) {
        throw ParseError(std::string("malformed problem file: ") + err.what());
    }
    return file;
}

std::string format_problem(const ProblemFile& file) {
    json j;
    if (const auto* m = std::get_if<domains::MotionDomain>(&file.domain))
        j = motion_json(*m, file.start, file.goal);
    else if (const auto* p = std::get_if<domains::PickPlaceDomain>(&file.domain))
        j = pickplace_json(*p);
    else if (const auto* t1 = std::get_if<domains::Tabletop1DDomain>(&file.domain))
        j = tabletop1d_json(*t1);
    else
        j = tabletop2d_json(std::get<domains::Tabletop2DDomain>(file.domain));
    return j.dump(2) + "\n";
}

domains::BuiltProblem build_problem(const ProblemFile& file) {
    if (const auto* m = std::get_if<domains::MotionDomain>(&file.domain))
        return domains::build_motion_problem(*m, file.start, file.goal);
    if (const auto* p = std::get_if<domains::PickPlaceDomain>(&file.domain))
        return domains::build_pickplace_problem(*p);
    if (const auto* t1 = std::get_if<domains::Tabletop1DDomain>(&file.domain))
        return domains::build_tabletop1d_problem(*t1);
    return domains::build_tabletop2d_problem(std::get<domains::Tabletop2DDomain>(file.domain));
}

ProblemFile problem_file_from_motion(const domains::MotionDomain& d, geom::Vec2 start,
                                     geom::Vec2 goal) {
    ProblemFile f;
    f.domain = d;
    f.start = start;
    f.goal = goal;
    return f;
}

ProblemFile problem_file_from_pickplace(const domains::PickPlaceDomain& d) {
    ProblemFile f;
    f.domain = d;
    return f;
}

ProblemFile problem_file_from_tabletop1d(const domains::Tabletop1DDomain& d) {
    ProblemFile f;
    f.domain = d;
    return f;
}

ProblemFile problem_file_from_tabletop2d(const domains::Tabletop2DDomain& d) {
    ProblemFile f;
    f.domain = d;
    return f;
}

std::string format_plan(const Plan& plan) { return plan_json(plan).dump(2) + "\n"; }

Plan parse_plan(const std::string& text, const TransitionSystem& system) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& err) {
        throw ParseError(std::string("invalid JSON: ") + err.what());
    }
    if (j.contains("plan"))
        j = j.at("plan");  // accept whole reports
    Plan plan;
    try {
        for (const json& name : j.at("skeleton"))
            plan.skeleton.clause_names.push_back(name.get<std::string>());
        for (const json& state : j.at("states")) {
            std::vector<Value> values;
            for (const json& v : state)
                values.push_back(parse_value(v));
            plan.states.push_back(std::move(values));
        }
        for (const json& u : j.at("controls")) {
            std::vector<Value> values;
            for (const json& v : u)
                values.push_back(parse_value(v));
            plan.controls.push_back(std::move(values));
        }
    } catch (const json::exception& err) {
        throw ParseError(std::string("malformed plan: ") + err.what());
    }
    (void)system;
    return plan;
}

std::string format_report(const PlannerResult& result, const PlannerConfig& config,
                          const std::string& algo, const ReportOptions& options) {
    json j;
    switch (result.outcome) {
    case PlanOutcome::solved:
        j["outcome"] = "solved";
        break;
    case PlanOutcome::infeasible:
        j["outcome"] = "infeasible";
        break;
    case PlanOutcome::timeout:
        j["outcome"] = "timeout";
        break;
    }
    if (result.solved())
        j["plan"] = json::parse(format_plan(result.plan));
    json stats;
    stats["iterations"] = result.stats.iterations;
    stats["episodes"] = result.stats.episodes;
    stats["search_calls"] = result.stats.search_calls;
    stats["elements_over_time"] = result.stats.elements_over_time;
    stats["sampler_calls"] = result.stats.sampler_calls;
    if (options.include_timing)
        stats["total_seconds"] = result.stats.total_seconds;
    if (!result.stats.warnings.empty())
        stats["warnings"] = result.stats.warnings;
    j["stats"] = stats;
    j["seed"] = config.seed;
    json cfg;
    cfg["algo"] = algo;
    cfg["search"] = config.search == SearchKind::bfs ? "bfs" : "hff";
    cfg["lazy_cost_weight"] = config.lazy_cost_weight;
    cfg["timeout_s"] = config.timeout_s;
    cfg["use_axioms"] = config.use_axioms;
    j["config"] = cfg;
    return j.dump(2) + "\n";
}

}  // namespace fts::io
