#include "dra/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dra/rng.hpp"
#include "dra/theory.hpp"

namespace dra {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw std::invalid_argument("scenario." + path + ": " + message);
}

void require_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end())
            fail(path + "." + key, "unknown key");
    }
}

double get_num(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) fail(path + "." + key, "missing");
    if (!obj[key].is_number()) fail(path + "." + key, "expected a number");
    return obj[key].get<double>();
}

double get_num_or(const json& obj, const char* key, double fallback) {
    return obj.contains(key) ? obj[key].get<double>() : fallback;
}

long long get_int(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) fail(path + "." + key, "missing");
    if (!obj[key].is_number_integer()) fail(path + "." + key, "expected an integer");
    return obj[key].get<long long>();
}

std::string get_str(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) fail(path + "." + key, "missing");
    if (!obj[key].is_string()) fail(path + "." + key, "expected a string");
    return obj[key].get<std::string>();
}

Vec parse_vec(const json& v, const std::string& path) {
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array() || v.empty()) fail(path, "expected a number or a non-empty array");
    Vec out;
    for (const auto& x : v) {
        if (!x.is_number()) fail(path, "expected numeric entries");
        out.push_back(x.get<double>());
    }
    return out;
}

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::vector<GeneratorRecord> read_generators(std::istream& in, bool strict_paper_ranges, const std::string& origin) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(origin + ": empty file");
    auto strip = [](std::string s) {
        s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\r'; }), s.end());
        return s;
    };
    if (strip(line) != "id,eta,zeta,xi,theta_min,theta_max")
        throw std::invalid_argument(origin + ": line 1: expected header id,eta,zeta,xi,theta_min,theta_max");

    std::vector<GeneratorRecord> records;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string raw = strip(line);
        if (raw.empty()) continue;
        GeneratorRecord rec;
        char c1, c2, c3, c4, c5;
        std::istringstream ls(raw);
        if (!(ls >> rec.id >> c1 >> rec.eta >> c2 >> rec.zeta >> c3 >> rec.xi >> c4 >> rec.theta_min >> c5 >>
              rec.theta_max) ||
            c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',' || c5 != ',')
            throw std::invalid_argument(origin + ": line " + std::to_string(line_no) + ": malformed row");
        std::string rest;
        if (ls >> rest) throw std::invalid_argument(origin + ": line " + std::to_string(line_no) + ": trailing data");
        if (!(rec.eta > 0.0))
            throw std::invalid_argument(origin + ": line " + std::to_string(line_no) + ": eta must be > 0");
        if (rec.theta_min > rec.theta_max)
            throw std::invalid_argument(origin + ": line " + std::to_string(line_no) + ": theta_min > theta_max");
        if (strict_paper_ranges) {
            auto in_range = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
            if (!in_range(rec.eta, 0.0024, 0.0697) || !in_range(rec.zeta, 8.3391, 37.6968) ||
                !in_range(rec.xi, 6.78, 74.33) || !in_range(rec.theta_min, 5.0, 150.0) ||
                !in_range(rec.theta_max, 30.0, 420.0))
                throw std::invalid_argument(origin + ": line " + std::to_string(line_no) +
                                            ": value outside declared dataset ranges");
        }
        records.push_back(rec);
    }
    if (records.empty()) throw std::invalid_argument(origin + ": no generator rows");
    return records;
}

std::vector<GeneratorRecord> load_generators(const std::string& path, bool strict_paper_ranges) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open generator file: " + path);
    return read_generators(in, strict_paper_ranges, path);
}

Scenario scenario_from_json(const json& j, const std::string& base_dir, const std::string& fallback_name) {
    require_keys(j, "", {"schema_version", "name", "problem", "topology", "weights", "algorithm", "aggregator",
                         "byzantine", "attack", "attacks", "schedule", "iterations", "lambda0", "nonneg_dual",
                         "seed", "virtual_weights", "output_dir"});
    Scenario sc;
    sc.base_dir = base_dir;
    sc.schema_version = static_cast<int>(get_int(j, "", "schema_version"));
    if (sc.schema_version != 1) fail("schema_version", "unsupported version " + std::to_string(sc.schema_version));
    sc.name = j.contains("name") ? get_str(j, "", "name") : fallback_name;

    // problem
    if (!j.contains("problem")) fail("problem", "missing");
    const json& pj = j["problem"];
    sc.problem.type = get_str(pj, "problem", "type");
    if (sc.problem.type == "synthetic") {
        require_keys(pj, "problem", {"type", "agents", "s", "a_range", "b_mean", "b_std", "box", "seed"});
        sc.problem.agents = static_cast<int>(get_int(pj, "problem", "agents"));
        if (sc.problem.agents < 1) fail("problem.agents", "must be >= 1");
        sc.problem.s = parse_vec(pj.at("s"), "problem.s");
        if (pj.contains("a_range")) {
            const Vec r = parse_vec(pj["a_range"], "problem.a_range");
            if (r.size() != 2 || !(r[0] > 0.0) || r[0] > r[1]) fail("problem.a_range", "expected [lo, hi] with 0 < lo <= hi");
            sc.problem.a_range = {r[0], r[1]};
        }
        sc.problem.b_mean = get_num_or(pj, "b_mean", 2.0);
        sc.problem.b_std = get_num_or(pj, "b_std", 0.6);
        if (sc.problem.b_std < 0.0) fail("problem.b_std", "must be >= 0");
        if (pj.contains("box")) {
            const Vec r = parse_vec(pj["box"], "problem.box");
            if (r.size() != 2 || r[0] > r[1]) fail("problem.box", "expected [lo, hi] with lo <= hi");
            sc.problem.box = {r[0], r[1]};
        }
        sc.problem.seed = pj.contains("seed") ? pj["seed"].get<std::uint64_t>() : 0;
    } else if (sc.problem.type == "inline") {
        require_keys(pj, "problem", {"type", "agents", "s"});
        if (!pj.contains("agents") || !pj["agents"].is_array() || pj["agents"].empty())
            fail("problem.agents", "expected a non-empty array of agent objects");
        sc.problem.s = parse_vec(pj.at("s"), "problem.s");
        int next_id = 0;
        for (const auto& aj : pj["agents"]) {
            const std::string apath = "problem.agents[" + std::to_string(next_id) + "]";
            require_keys(aj, apath, {"a", "b_shift", "c0", "lo", "hi"});
            AgentSpec ag;
            ag.id = next_id++;
            ag.cost.a = parse_vec(aj.at("a"), apath + ".a");
            ag.cost.b_shift = parse_vec(aj.at("b_shift"), apath + ".b_shift");
            ag.cost.c0 = get_num_or(aj, "c0", 0.0);
            ag.box.lo = parse_vec(aj.at("lo"), apath + ".lo");
            ag.box.hi = parse_vec(aj.at("hi"), apath + ".hi");
            ag.validate();
            sc.problem.inline_agents.push_back(std::move(ag));
        }
        sc.problem.agents = static_cast<int>(sc.problem.inline_agents.size());
    } else if (sc.problem.type == "generator_csv") {
        require_keys(pj, "problem", {"type", "path", "total_resource", "strict_paper_ranges"});
        sc.problem.path = get_str(pj, "problem", "path");
        sc.problem.total_resource = get_num(pj, "problem", "total_resource");
        if (!(sc.problem.total_resource > 0.0)) fail("problem.total_resource", "must be > 0");
        sc.problem.strict_paper_ranges =
            pj.contains("strict_paper_ranges") && pj["strict_paper_ranges"].get<bool>();
    } else {
        fail("problem.type", "expected synthetic | inline | generator_csv");
    }

    // topology
    if (!j.contains("topology")) fail("topology", "missing");
    const json& tj = j["topology"];
    sc.topology.type = get_str(tj, "topology", "type");
    if (sc.topology.type == "random_regular") {
        require_keys(tj, "topology", {"type", "degree", "seed"});
        sc.topology.degree = static_cast<int>(get_int(tj, "topology", "degree"));
        if (sc.topology.degree < 1) fail("topology.degree", "must be >= 1");
        sc.topology.seed = tj.contains("seed") ? tj["seed"].get<std::uint64_t>() : 0;
    } else if (sc.topology.type == "edge_list") {
        require_keys(tj, "topology", {"type", "path"});
        sc.topology.path = get_str(tj, "topology", "path");
    } else if (sc.topology.type == "complete") {
        require_keys(tj, "topology", {"type"});
    } else {
        fail("topology.type", "expected random_regular | edge_list | complete");
    }

    sc.weight_rule = j.contains("weights") ? get_str(j, "", "weights") : "equal";
    if (sc.weight_rule != "equal" && sc.weight_rule != "metropolis")
        fail("weights", "expected equal | metropolis");
    sc.algorithm = j.contains("algorithm") ? get_str(j, "", "algorithm") : "attack_free";
    if (sc.algorithm != "attack_free" && sc.algorithm != "resilient")
        fail("algorithm", "expected attack_free | resilient");

    if (j.contains("aggregator")) {
        const json& gj = j["aggregator"];
        require_keys(gj, "aggregator", {"rule", "b", "tau"});
        sc.aggregator.rule = agg_rule_from_string(get_str(gj, "aggregator", "rule"));
        if (gj.contains("b")) {
            if (gj["b"].is_string()) {
                if (gj["b"].get<std::string>() != "auto") fail("aggregator.b", "expected an integer or \"auto\"");
                sc.aggregator.auto_b = true;
            } else if (gj["b"].is_number_integer()) {
                const long long b = gj["b"].get<long long>();
                if (b < 0) fail("aggregator.b", "must be >= 0");
                sc.aggregator.b = static_cast<int>(b);
            } else {
                fail("aggregator.b", "expected an integer or \"auto\"");
            }
        }
        sc.aggregator.tau = get_num_or(gj, "tau", 0.0);
        if (sc.aggregator.tau < 0.0) fail("aggregator.tau", "must be >= 0");
    }

    if (j.contains("byzantine")) {
        const json& bj = j["byzantine"];
        require_keys(bj, "byzantine", {"ids", "count", "seed", "max_byzantine_neighbors"});
        if (bj.contains("ids")) {
            if (bj.contains("count")) fail("byzantine", "give either ids or count, not both");
            for (const auto& x : bj["ids"]) {
                if (!x.is_number_integer() || x.get<long long>() < 0) fail("byzantine.ids", "expected agent ids");
                sc.byzantine.ids.push_back(x.get<int>());
            }
        } else if (bj.contains("count")) {
            const long long c = get_int(bj, "byzantine", "count");
            if (c < 0) fail("byzantine.count", "must be >= 0");
            sc.byzantine.count = static_cast<int>(c);
            sc.byzantine.seed = bj.contains("seed") ? bj["seed"].get<std::uint64_t>() : 0;
            if (bj.contains("max_byzantine_neighbors")) {
                const long long m = get_int(bj, "byzantine", "max_byzantine_neighbors");
                if (m < 0) fail("byzantine.max_byzantine_neighbors", "must be >= 0");
                sc.byzantine.max_byzantine_neighbors = static_cast<int>(m);
            }
        }
    }

    if (j.contains("attack")) sc.attack = get_str(j, "", "attack");
    if (j.contains("attacks")) {
        if (!j["attacks"].is_object()) fail("attacks", "expected an object mapping agent id to preset name");
        for (const auto& [key, value] : j["attacks"].items()) {
            int id = 0;
            auto res = std::from_chars(key.data(), key.data() + key.size(), id);
            if (res.ec != std::errc() || res.ptr != key.data() + key.size() || id < 0)
                fail("attacks." + key, "keys must be agent ids");
            if (!value.is_string()) fail("attacks." + key, "expected a preset name");
            sc.attack_by_id[id] = value.get<std::string>();
        }
    }

    if (!j.contains("schedule")) fail("schedule", "missing");
    const json& sj = j["schedule"];
    const std::string kind = get_str(sj, "schedule", "kind");
    if (kind == "power") {
        require_keys(sj, "schedule", {"kind", "p"});
        const double p = get_num(sj, "schedule", "p");
        if (!(p > 0.0)) fail("schedule.p", "must be > 0");
        sc.schedule = StepSchedule::power(p);
    } else if (kind == "theorem") {
        require_keys(sj, "schedule", {"kind", "c", "k0"});
        const double c = get_num(sj, "schedule", "c");
        const long long k0 = get_int(sj, "schedule", "k0");
        if (!(c > 0.0)) fail("schedule.c", "must be > 0");
        if (k0 < 2) fail("schedule.k0", "must be >= 2");
        sc.schedule = StepSchedule::theorem(c, static_cast<int>(k0));
    } else {
        fail("schedule.kind", "expected power | theorem");
    }

    if (!j.contains("iterations")) fail("iterations", "missing");
    const long long iters = get_int(j, "", "iterations");
    if (iters < 1) fail("iterations", "must be >= 1");
    sc.iterations = static_cast<int>(iters);

    if (j.contains("lambda0")) sc.lambda0 = parse_vec(j["lambda0"], "lambda0");
    if (j.contains("nonneg_dual")) {
        if (!j["nonneg_dual"].is_boolean()) fail("nonneg_dual", "expected a boolean");
        sc.nonneg_dual = j["nonneg_dual"].get<bool>();
    }
    sc.seed = j.contains("seed") ? j["seed"].get<std::uint64_t>() : 0;
    if (j.contains("virtual_weights")) {
        sc.virtual_weight_rule = get_str(j, "", "virtual_weights");
        if (sc.virtual_weight_rule != "equal" && sc.virtual_weight_rule != "metropolis")
            fail("virtual_weights", "expected equal | metropolis");
    }
    if (j.contains("output_dir")) sc.output_dir = get_str(j, "", "output_dir");
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    const std::filesystem::path p(path);
    return scenario_from_json(j, p.parent_path().string(), p.stem().string());
}

nlohmann::json scenario_to_json(const Scenario& sc) {
    json j;
    j["schema_version"] = sc.schema_version;
    j["name"] = sc.name;
    json pj;
    pj["type"] = sc.problem.type;
    if (sc.problem.type == "synthetic") {
        pj["agents"] = sc.problem.agents;
        pj["s"] = sc.problem.s;
        pj["a_range"] = {sc.problem.a_range.first, sc.problem.a_range.second};
        pj["b_mean"] = sc.problem.b_mean;
        pj["b_std"] = sc.problem.b_std;
        pj["box"] = {sc.problem.box.first, sc.problem.box.second};
        pj["seed"] = sc.problem.seed;
    } else if (sc.problem.type == "inline") {
        json agents = json::array();
        for (const AgentSpec& ag : sc.problem.inline_agents) {
            json aj;
            aj["a"] = ag.cost.a;
            aj["b_shift"] = ag.cost.b_shift;
            aj["c0"] = ag.cost.c0;
            aj["lo"] = ag.box.lo;
            aj["hi"] = ag.box.hi;
            agents.push_back(std::move(aj));
        }
        pj["agents"] = std::move(agents);
        pj["s"] = sc.problem.s;
    } else {
        pj["path"] = sc.problem.path;
        pj["total_resource"] = sc.problem.total_resource;
        pj["strict_paper_ranges"] = sc.problem.strict_paper_ranges;
    }
    j["problem"] = std::move(pj);

    json tj;
    tj["type"] = sc.topology.type;
    if (sc.topology.type == "random_regular") {
        tj["degree"] = sc.topology.degree;
        tj["seed"] = sc.topology.seed;
    } else if (sc.topology.type == "edge_list") {
        tj["path"] = sc.topology.path;
    }
    j["topology"] = std::move(tj);

    j["weights"] = sc.weight_rule;
    j["algorithm"] = sc.algorithm;
    json gj;
    gj["rule"] = to_string(sc.aggregator.rule);
    if (sc.aggregator.auto_b)
        gj["b"] = "auto";
    else
        gj["b"] = sc.aggregator.b;
    gj["tau"] = sc.aggregator.tau;
    j["aggregator"] = std::move(gj);

    json bj;
    if (!sc.byzantine.ids.empty()) {
        bj["ids"] = sc.byzantine.ids;
    } else {
        bj["count"] = sc.byzantine.count;
        bj["seed"] = sc.byzantine.seed;
        if (sc.byzantine.max_byzantine_neighbors >= 0)
            bj["max_byzantine_neighbors"] = sc.byzantine.max_byzantine_neighbors;
    }
    j["byzantine"] = std::move(bj);

    if (!sc.attack.empty()) j["attack"] = sc.attack;
    if (!sc.attack_by_id.empty()) {
        json aj;
        for (const auto& [id, name] : sc.attack_by_id) aj[std::to_string(id)] = name;
        j["attacks"] = std::move(aj);
    }

    json sj;
    if (sc.schedule.kind == ScheduleKind::power) {
        sj["kind"] = "power";
        sj["p"] = sc.schedule.exponent;
    } else {
        sj["kind"] = "theorem";
        sj["c"] = sc.schedule.scale;
        sj["k0"] = sc.schedule.offset;
    }
    j["schedule"] = std::move(sj);
    j["iterations"] = sc.iterations;
    if (!sc.lambda0.empty()) j["lambda0"] = sc.lambda0;
    j["nonneg_dual"] = sc.nonneg_dual;
    j["seed"] = sc.seed;
    j["virtual_weights"] = sc.virtual_weight_rule;
    j["output_dir"] = sc.output_dir;
    return j;
}

namespace {

std::string resolve_path(const Scenario& sc, const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_absolute() || sc.base_dir.empty()) return path;
    return (std::filesystem::path(sc.base_dir) / p).string();
}

ProblemInstance build_instance(const Scenario& sc, const std::set<int>& byzantine) {
    std::vector<AgentSpec> agents;
    Vec s;
    if (sc.problem.type == "synthetic") {
        s = sc.problem.s;
        const std::size_t D = s.size();
        for (int i = 0; i < sc.problem.agents; ++i) {
            SplitMix64 rng = keyed_stream(sc.problem.seed, 0x4147u /* "AG" */, static_cast<std::uint64_t>(i));
            AgentSpec ag;
            ag.id = i;
            ag.cost.a.resize(D);
            ag.cost.b_shift.resize(D);
            ag.box.lo.assign(D, sc.problem.box.first);
            ag.box.hi.assign(D, sc.problem.box.second);
            for (std::size_t d = 0; d < D; ++d) {
                ag.cost.a[d] = rng.uniform(sc.problem.a_range.first, sc.problem.a_range.second);
                ag.cost.b_shift[d] = sc.problem.b_mean + sc.problem.b_std * rng.gaussian();
            }
            agents.push_back(std::move(ag));
        }
    } else if (sc.problem.type == "inline") {
        agents = sc.problem.inline_agents;
        s = sc.problem.s;
    } else {
        const auto records = load_generators(resolve_path(sc, sc.problem.path), sc.problem.strict_paper_ranges);
        for (std::size_t i = 0; i < records.size(); ++i) {
            AgentSpec ag;
            ag.id = static_cast<int>(i);
            ag.cost = QuadraticCost::from_poly(records[i].eta, records[i].zeta, records[i].xi);
            ag.box.lo = {records[i].theta_min};
            ag.box.hi = {records[i].theta_max};
            agents.push_back(std::move(ag));
        }
        s = {sc.problem.total_resource / static_cast<double>(records.size())};
    }
    return ProblemInstance(std::move(agents), std::move(s), byzantine);
}

Topology build_topology(const Scenario& sc, int agents) {
    if (sc.topology.type == "random_regular") return random_regular(agents, sc.topology.degree, sc.topology.seed);
    if (sc.topology.type == "complete") return complete_graph(agents);
    Topology t = load_edge_list(resolve_path(sc, sc.topology.path), agents);
    if (t.nodes != agents)
        throw std::invalid_argument("edge list covers " + std::to_string(t.nodes) + " nodes, problem has " +
                                    std::to_string(agents) + " agents");
    return t;
}

std::set<int> draw_byzantine(const Scenario& sc, const Topology& topology) {
    if (!sc.byzantine.ids.empty()) {
        std::set<int> ids(sc.byzantine.ids.begin(), sc.byzantine.ids.end());
        for (int id : ids)
            if (id >= topology.nodes) throw std::invalid_argument("byzantine id " + std::to_string(id) + " out of range");
        return ids;
    }
    if (sc.byzantine.count == 0) return {};
    const int J = topology.nodes;
    if (sc.byzantine.count >= J) throw std::invalid_argument("byzantine.count must leave at least one honest agent");
    const auto adj = topology.adjacency();

    // Rejection sampling: cap per-agent Byzantine neighbors when requested and
    // keep the honest subgraph connected.
    for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
        SplitMix64 rng = keyed_stream(sc.byzantine.seed, 0x425Au /* "BZ" */, attempt);
        std::vector<int> pool(J);
        for (int i = 0; i < J; ++i) pool[i] = i;
        std::set<int> ids;
        for (int k = 0; k < sc.byzantine.count; ++k) {
            const std::size_t pick = k + rng.uniform_int(static_cast<std::uint64_t>(J - k));
            std::swap(pool[k], pool[pick]);
            ids.insert(pool[k]);
        }
        bool ok = true;
        if (sc.byzantine.max_byzantine_neighbors >= 0) {
            for (int i = 0; i < J && ok; ++i) {
                int c = 0;
                for (int jn : adj[i]) c += ids.count(jn) ? 1 : 0;
                if (c > sc.byzantine.max_byzantine_neighbors) ok = false;
            }
        }
        if (ok) {
            const HonestSubgraph sub = honest_subgraph(topology, ids);
            ok = is_connected(sub.topology);
        }
        if (ok) return ids;
    }
    throw std::runtime_error("byzantine selection: constraints unsatisfiable after 1000 attempts");
}

WeightMatrix build_weights(const std::string& rule, const Topology& topology) {
    return rule == "metropolis" ? metropolis_weights(topology) : equal_weights(topology);
}

}  // namespace

RunConfig build_run_config(const Scenario& sc) {
    RunConfig cfg;
    // Byzantine selection needs the topology; the instance needs the Byzantine
    // set, so materialize in that order with a provisional instance size.
    const int agents = sc.problem.type == "generator_csv"
                           ? static_cast<int>(load_generators(resolve_path(sc, sc.problem.path),
                                                              sc.problem.strict_paper_ranges)
                                                  .size())
                           : (sc.problem.type == "inline" ? static_cast<int>(sc.problem.inline_agents.size())
                                                          : sc.problem.agents);
    cfg.topology = build_topology(sc, agents);
    std::set<int> byz;
    if (sc.algorithm == "resilient") byz = draw_byzantine(sc, cfg.topology);
    cfg.problem = build_instance(sc, byz);
    cfg.weights = build_weights(sc.weight_rule, cfg.topology);
    cfg.aggregator = sc.aggregator;
    cfg.schedule = sc.schedule;
    cfg.iterations = sc.iterations;
    cfg.lambda0 = sc.lambda0.empty() ? Vec(cfg.problem.dim(), 0.0) : sc.lambda0;
    cfg.nonneg_dual = sc.nonneg_dual;
    cfg.seed = sc.seed;
    for (int id : byz) {
        auto it = sc.attack_by_id.find(id);
        const std::string name = it != sc.attack_by_id.end() ? it->second : sc.attack;
        if (name.empty())
            throw std::invalid_argument("no attack preset configured for Byzantine agent " + std::to_string(id));
        cfg.attacks[id] = attack_preset(name, sc.seed);
    }
    cfg.validate();
    return cfg;
}

Trace run_scenario(const Scenario& sc) {
    const RunConfig cfg = build_run_config(sc);
    return sc.algorithm == "resilient" ? run_resilient(cfg) : run_attack_free(cfg);
}

namespace {

std::string write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    return path.string();
}

std::string write_trace_file(const Trace& trace, const std::filesystem::path& path) {
    std::ostringstream os;
    write_trace_csv(trace, os);
    return write_text_file(path, os.str());
}

json reference_to_json(const ReferenceSolution& ref) {
    json j;
    j["agent_ids"] = ref.agent_ids;
    j["lambda_star"] = ref.lambda_star;
    json thetas = json::array();
    for (const Vec& t : ref.theta_star) thetas.push_back(t);
    j["theta_star"] = std::move(thetas);
    j["residual"] = ref.residual;
    j["iterations"] = ref.iterations;
    j["lambda_plateau"] = ref.lambda_plateau;
    return j;
}

json verdicts_to_json(const StepSizeVerdicts& v) {
    json j;
    j["k0_floor"] = v.k0_floor;
    j["all_pass"] = v.all_pass;
    json conds = json::array();
    for (const ConditionVerdict& c : v.conditions) {
        json cj;
        cj["name"] = c.name;
        cj["pass"] = c.pass;
        if (!c.pass) cj["first_violation_k"] = c.first_violation_k;
        conds.push_back(std::move(cj));
    }
    j["conditions"] = std::move(conds);
    return j;
}

struct Diagnostics {
    RunConfig cfg;
    HonestSubgraph honest;
    WeightMatrix virtual_weights;
};

Diagnostics make_diagnostics(const Scenario& sc) {
    Scenario copy = sc;
    // The Byzantine draw only happens for resilient runs; diagnostics always
    // honor the configured set.
    copy.algorithm = sc.byzantine.count > 0 || !sc.byzantine.ids.empty() ? "resilient" : sc.algorithm;
    Diagnostics d{build_run_config(copy), {}, {}};
    d.honest = honest_subgraph(d.cfg.topology, d.cfg.problem.byzantine);
    d.virtual_weights = build_weights(sc.virtual_weight_rule, d.honest.topology);
    return d;
}

}  // namespace

std::vector<std::string> run_command(const Scenario& scenario, const std::string& subcommand,
                                     const CommandOptions& options) {
    const std::filesystem::path out_dir(options.out_dir.empty() ? scenario.output_dir : options.out_dir);
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> written;

    if (subcommand == "run") {
        const Trace trace = run_scenario(scenario);
        written.push_back(write_trace_file(trace, out_dir / (scenario.name + "_trace.csv")));
        if (options.dump_state) {
            std::ostringstream os;
            write_trace_states_json(trace, os);
            written.push_back(write_text_file(out_dir / (scenario.name + "_states.json"), os.str()));
        }
        return written;
    }

    if (subcommand == "sweep") {
        if (options.sweep_param.empty() || options.sweep_values.empty())
            throw std::invalid_argument("sweep: --param and --values are required");
        std::string summary = "param,value,primal_opt,dual_opt,cost_opt,constraint_violation,dual_consensus\n";
        for (double value : options.sweep_values) {
            Scenario variant = scenario;
            if (options.sweep_param == "B") {
                variant.byzantine.ids.clear();
                variant.byzantine.count = static_cast<int>(value);
            } else if (options.sweep_param == "b") {
                variant.aggregator.auto_b = false;
                variant.aggregator.b = static_cast<int>(value);
            } else if (options.sweep_param == "tau") {
                variant.aggregator.tau = value;
            } else if (options.sweep_param == "seed") {
                variant.seed = static_cast<std::uint64_t>(value);
                variant.byzantine.seed = static_cast<std::uint64_t>(value);
                variant.topology.seed = static_cast<std::uint64_t>(value);
            } else if (options.sweep_param == "iterations") {
                variant.iterations = static_cast<int>(value);
            } else {
                throw std::invalid_argument("sweep: unknown parameter " + options.sweep_param +
                                            " (expected B | b | tau | seed | iterations)");
            }
            const Trace trace = run_scenario(variant);
            const std::string tag = scenario.name + "_" + options.sweep_param + format_double(value);
            written.push_back(write_trace_file(trace, out_dir / (tag + "_trace.csv")));
            const IterationRecord& last = trace.records.back();
            summary += options.sweep_param + "," + format_double(value) + "," + format_double(last.primal_opt) +
                       "," + format_double(last.dual_opt) + "," + format_double(last.cost_opt) + "," +
                       format_double(last.constraint_violation) + "," + format_double(last.dual_consensus) + "\n";
        }
        written.push_back(
            write_text_file(out_dir / (scenario.name + "_" + options.sweep_param + "_sweep_summary.csv"), summary));
        return written;
    }

    if (subcommand == "oracle") {
        const Diagnostics d = make_diagnostics(scenario);
        const Subset subset = d.cfg.problem.byzantine_count() > 0 ? Subset::honest_only : Subset::all;
        const ReferenceSolution ref = solve_reference(d.cfg.problem, subset, 1e-10);
        json j = reference_to_json(ref);
        j["subset"] = subset == Subset::honest_only ? "honest_only" : "all";
        written.push_back(write_text_file(out_dir / (scenario.name + "_reference.json"), j.dump(2) + "\n"));
        return written;
    }

    if (subcommand == "bounds") {
        const Diagnostics d = make_diagnostics(scenario);
        TheoryConstants c;
        const auto [u_f, L_f] = convexity_constants(d.cfg.problem);
        c.u_f = u_f;
        c.L_f = L_f;
        c.total_agents = d.cfg.problem.total_agents();
        c.honest_agents = d.cfg.problem.honest_count();
        c.kappa_tilde = d.cfg.weights.doubly_stochastic
                            ? kappa(d.cfg.weights, KappaVariant::full)
                            : std::numeric_limits<double>::quiet_NaN();
        c.kappa = kappa(d.virtual_weights, KappaVariant::honest);
        c.chi_sq = chi_squared(d.virtual_weights);
        c.rho = options.rho.value_or(0.0);
        c.delta = delta_bound(d.cfg.problem, DeltaMode::analytic);
        const TheoryReport report = make_theory_report(c, scenario.schedule, scenario.iterations);

        json j;
        j["u_f"] = report.u_f;
        j["L_f"] = report.L_f;
        j["alpha"] = report.alpha;
        j["beta"] = report.beta;
        if (std::isnan(report.kappa_tilde))
            j["kappa_tilde"] = nullptr;
        else
            j["kappa_tilde"] = report.kappa_tilde;
        j["kappa"] = report.kappa;
        j["chi_sq"] = report.chi_sq;
        j["rho"] = report.rho;
        j["epsilon"] = report.epsilon;
        j["delta"] = report.delta;
        j["rho_condition_ok"] = report.rho_condition_ok;
        auto num_or_null = [](double v) -> json { return std::isinf(v) ? json(nullptr) : json(v); };
        j["dual_radius"] = num_or_null(report.dual_radius);
        j["primal_radius"] = num_or_null(report.primal_radius);
        j["primal_radius_derivation"] = num_or_null(report.primal_radius_derivation);
        j["stepsize"] = verdicts_to_json(report.stepsize);
        written.push_back(write_text_file(out_dir / (scenario.name + "_bounds.json"), j.dump(2) + "\n"));
        return written;
    }

    if (subcommand == "estimate") {
        const Diagnostics d = make_diagnostics(scenario);
        AggregatorConfig rule = d.cfg.aggregator;
        if (rule.auto_b) {
            // The engine derives auto trim counts from real neighborhoods; in
            // a synthetic trial the injected count is the analog.
            rule.auto_b = false;
            rule.b = options.byz_per_node;
        }
        const double rho_hat = estimate_contraction(rule, d.virtual_weights, d.honest.topology,
                                                    options.byz_per_node, options.trials, scenario.seed);
        json j;
        j["rho_hat"] = rho_hat;
        j["rho_hat_sq"] = rho_hat * rho_hat;
        j["kappa"] = kappa(d.virtual_weights, KappaVariant::honest);
        if (d.cfg.weights.doubly_stochastic)
            j["kappa_tilde"] = kappa(d.cfg.weights, KappaVariant::full);
        else
            j["kappa_tilde"] = nullptr;
        j["chi_sq"] = chi_squared(d.virtual_weights);
        j["delta_analytic"] = delta_bound(d.cfg.problem, DeltaMode::analytic);
        j["delta_sampled"] = delta_bound(d.cfg.problem, DeltaMode::sampled, 1000, scenario.seed);
        j["trials"] = options.trials;
        j["byzantine_per_node"] = options.byz_per_node;
        written.push_back(write_text_file(out_dir / (scenario.name + "_estimate.json"), j.dump(2) + "\n"));
        return written;
    }

    throw std::invalid_argument("unknown subcommand: " + subcommand);
}

}  // namespace dra
