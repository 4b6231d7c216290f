#include "dra/attacks.hpp"

#include <stdexcept>
#include <string>

#include "dra/rng.hpp"

namespace dra {

AttackSpec AttackSpec::constant(Vec v) {
    AttackSpec s;
    s.kind = AttackKind::constant;
    s.value = std::move(v);
    return s;
}

AttackSpec AttackSpec::gaussian(double mean, double stddev, std::uint64_t seed) {
    AttackSpec s;
    s.kind = AttackKind::gaussian;
    s.mean = mean;
    s.stddev = stddev;
    s.seed = seed;
    return s;
}

AttackSpec AttackSpec::custom(std::function<Vec(const AttackContext&)> fn) {
    AttackSpec s;
    s.kind = AttackKind::custom;
    s.custom_fn = std::move(fn);
    return s;
}

void AttackSpec::validate(std::size_t dim) const {
    switch (kind) {
        case AttackKind::constant:
            if (value.size() != dim)
                throw std::invalid_argument("AttackSpec: constant value has dimension " +
                                            std::to_string(value.size()) + ", problem has " + std::to_string(dim));
            break;
        case AttackKind::gaussian:
            if (stddev < 0.0) throw std::invalid_argument("AttackSpec: stddev must be >= 0");
            break;
        case AttackKind::custom:
            if (!custom_fn) throw std::invalid_argument("AttackSpec: custom attack without callback");
            break;
    }
}

Vec byzantine_message(const AttackSpec& spec, const AttackContext& ctx, std::size_t dim) {
    switch (spec.kind) {
        case AttackKind::constant:
            return spec.value;
        case AttackKind::gaussian: {
            SplitMix64 rng = keyed_stream(spec.seed, static_cast<std::uint64_t>(ctx.iteration),
                                          static_cast<std::uint64_t>(ctx.recipient),
                                          static_cast<std::uint64_t>(ctx.sender));
            Vec out(dim);
            for (std::size_t d = 0; d < dim; ++d) out[d] = spec.mean + spec.stddev * rng.gaussian();
            return out;
        }
        case AttackKind::custom:
            return spec.custom_fn(ctx);
    }
    throw std::logic_error("byzantine_message: unreachable");
}

AttackSpec attack_preset(const std::string& name, std::uint64_t seed) {
    if (name == "large_value_c1") return AttackSpec::constant({-0.01});
    if (name == "small_value_c1") return AttackSpec::constant({-600.0});
    if (name == "gauss_large_c1") return AttackSpec::gaussian(-30.0, 5.0, seed);
    if (name == "gauss_small_c1") return AttackSpec::gaussian(-300.0, 40.0, seed);
    if (name == "large_value_c2") return AttackSpec::constant({-0.01});
    if (name == "small_value_c2") return AttackSpec::constant({-100.0});
    if (name == "gauss_large_c2") return AttackSpec::gaussian(-10.0, 5.0, seed);
    if (name == "gauss_small_c2") return AttackSpec::gaussian(-50.0, 10.0, seed);
    throw std::invalid_argument("unknown attack preset: " + name);
}

const std::vector<std::string>& attack_preset_names() {
    static const std::vector<std::string> names = {
        "large_value_c1", "small_value_c1", "gauss_large_c1", "gauss_small_c1",
        "large_value_c2", "small_value_c2", "gauss_large_c2", "gauss_small_c2",
    };
    return names;
}

}  // namespace dra
