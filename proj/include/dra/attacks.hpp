#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dra/vecmath.hpp"

namespace dra {

enum class AttackKind { constant, gaussian, custom };

// What a Byzantine sender gets to see when crafting a message: the iteration,
// the (recipient, sender) pair, every honest half-step of this iteration, and
// the half-step the sender itself would have produced had it followed the
// protocol. The views are immutable within an iteration, so two-faced
// attackers (different message per recipient) are expressible.
struct AttackContext {
    int iteration = 0;
    int recipient = 0;
    int sender = 0;
    const std::vector<Vec>* half_steps = nullptr;  // indexed by agent id
    const std::vector<int>* honest_ids = nullptr;
    const Vec* sender_half_step = nullptr;
};

struct AttackSpec {
    AttackKind kind = AttackKind::constant;
    Vec value;          // constant
    double mean = 0.0;  // gaussian, per dimension
    double stddev = 0.0;
    std::uint64_t seed = 0;
    std::function<Vec(const AttackContext&)> custom_fn;

    static AttackSpec constant(Vec v);
    static AttackSpec gaussian(double mean, double stddev, std::uint64_t seed = 0);
    static AttackSpec custom(std::function<Vec(const AttackContext&)> fn);

    void validate(std::size_t dim) const;
};

// The malicious message substituted for a Byzantine sender's half-step.
// Gaussian draws are keyed by (seed, iteration, recipient, sender) so repeated
// runs are bit-identical without shared RNG state.
Vec byzantine_message(const AttackSpec& spec, const AttackContext& ctx, std::size_t dim);

// Named presets; the trailing seed is baked into the returned spec.
//   large_value_c1, small_value_c1, gauss_large_c1, gauss_small_c1,
//   large_value_c2, small_value_c2, gauss_large_c2, gauss_small_c2
AttackSpec attack_preset(const std::string& name, std::uint64_t seed);
const std::vector<std::string>& attack_preset_names();

}  // namespace dra
