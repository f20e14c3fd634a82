#pragma once

#include <cstdint>
#include <vector>

#include "pomdplab/errors.hpp"

namespace pomdplab {

/// Dense indexing for windows of L (action, extended-observation) pairs.
///
/// Symbol ranges per slot:
///   action: 0..A-1, plus PAD = A
///   observation: 0..O-1 (real), SINK = O, plus PAD = O+1
/// A pair packs as a*(O+2)+o, a window as a base-R number with
/// R = (A+1)*(O+2); the newest pair is the least significant digit.
/// The all-PAD window is therefore R^L - 1.
///
/// Canonical windows pad only the oldest slots: at step h exactly
/// min(L, h-1) pairs are real. Histories sharing the same meaningful
/// suffix map to the same canonical index.
class ZSpace {
public:
    ZSpace() = default;
    ZSpace(int num_actions, int num_real_obs, int window) : A_(num_actions), O_(num_real_obs), L_(window) {
        if (A_ < 1 || O_ < 1 || L_ < 1) throw ConfigError("ZSpace requires A,O,L >= 1");
        pair_radix_ = static_cast<std::uint64_t>(A_ + 1) * (O_ + 2);
        size_ = 1;
        for (int i = 0; i < L_; ++i) {
            size_ *= pair_radix_;
            if (size_ > (1ULL << 40)) throw DeskScaleError("Z window space too large for dense indexing");
        }
    }

    int num_actions() const { return A_; }
    int num_real_obs() const { return O_; }
    int num_ext_obs() const { return O_ + 1; }  // real observations plus the sink observation
    int window() const { return L_; }
    std::uint64_t size() const { return size_; }

    int pad_action() const { return A_; }
    int sink_obs() const { return O_; }
    int pad_obs() const { return O_ + 1; }

    std::uint64_t all_pad() const { return size_ - 1; }

    std::uint64_t pack_pair(int a, int o) const {
        return static_cast<std::uint64_t>(a) * (O_ + 2) + o;
    }

    /// Shift the window one step: drop the oldest pair, append (a, o).
    std::uint64_t advance(std::uint64_t z, int a, int o) const {
        const std::uint64_t keep = size_ / pair_radix_;
        return (z % keep) * pair_radix_ + pack_pair(a, o);
    }

    /// Pair at the given age (0 = newest).
    std::pair<int, int> pair_at(std::uint64_t z, int age) const {
        for (int i = 0; i < age; ++i) z /= pair_radix_;
        std::uint64_t p = z % pair_radix_;
        return {static_cast<int>(p / (O_ + 2)), static_cast<int>(p % (O_ + 2))};
    }

    /// Final (most recent) observation symbol of the window; PAD for the
    /// all-PAD state.
    int last_obs(std::uint64_t z) const { return static_cast<int>((z % pair_radix_) % (O_ + 2)); }

    bool contains_sink_obs(std::uint64_t z) const {
        for (int age = 0; age < L_; ++age) {
            if (z % pair_radix_ % (O_ + 2) == static_cast<std::uint64_t>(sink_obs())) return true;
            z /= pair_radix_;
        }
        return false;
    }

    /// Number of real (non-PAD) pairs in a canonical window at step h.
    int real_pairs_at_step(int h) const { return std::min(L_, h - 1); }

    /// Canonical window of a history (a_{1:h-1}, o_{2:h}):
    /// the last min(L, h-1) pairs, older slots PAD.
    /// actions.size() must be h-1 and observations.size() h-1 (o_2..o_h).
    std::uint64_t canonical(const std::vector<int>& actions, const std::vector<int>& observations) const {
        const int n = static_cast<int>(actions.size());
        if (static_cast<int>(observations.size()) != n)
            throw ConfigError("history actions/observations length mismatch");
        std::uint64_t z = all_pad();
        const int from = std::max(0, n - L_);
        for (int i = from; i < n; ++i) z = advance(z, actions[i], observations[i]);
        return z;
    }

    /// Enumerates canonical windows with exactly `real` trailing real
    /// pairs (real action, real-or-sink observation), ascending by index.
    std::vector<std::uint64_t> canonical_states(int real) const;

    /// Canonical states reachable notionally at step h.
    std::vector<std::uint64_t> canonical_states_at_step(int h) const {
        return canonical_states(real_pairs_at_step(h));
    }

    bool is_canonical(std::uint64_t z, int real) const;

    /// Re-encodes a canonical window of this space as a canonical window
    /// of `to` (same A and O, to.window() <= window()), keeping the
    /// newest pairs. `h` fixes how many pairs are real.
    std::uint64_t translate(std::uint64_t z, const ZSpace& to, int h) const {
        const int real_to = to.real_pairs_at_step(h);
        if (real_to > real_pairs_at_step(h))
            throw InternalError("ZSpace::translate: target window longer than source");
        std::uint64_t out = to.all_pad();
        for (int age = real_to - 1; age >= 0; --age) {
            auto [a, o] = pair_at(z, age);
            out = to.advance(out, a, o);
        }
        return out;
    }

private:
    int A_ = 0, O_ = 0, L_ = 0;
    std::uint64_t pair_radix_ = 0;
    std::uint64_t size_ = 0;
};

}  // namespace pomdplab
