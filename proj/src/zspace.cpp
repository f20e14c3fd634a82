#include "pomdplab/zspace.hpp"

#include <algorithm>

namespace pomdplab {

std::vector<std::uint64_t> ZSpace::canonical_states(int real) const {
    real = std::min(real, L_);
    std::vector<std::uint64_t> out;
    std::vector<std::uint64_t> cur{all_pad()};
    for (int i = 0; i < real; ++i) {
        std::vector<std::uint64_t> next;
        next.reserve(cur.size() * A_ * (O_ + 1));
        for (std::uint64_t z : cur)
            for (int a = 0; a < A_; ++a)
                for (int o = 0; o <= O_; ++o)  // real observations and the sink observation
                    next.push_back(advance(z, a, o));
        cur = std::move(next);
    }
    std::sort(cur.begin(), cur.end());
    return cur;
}

bool ZSpace::is_canonical(std::uint64_t z, int real) const {
    real = std::min(real, L_);
    for (int age = 0; age < L_; ++age) {
        auto [a, o] = pair_at(z, age);
        const bool should_be_real = age < real;
        const bool a_pad = (a == pad_action());
        const bool o_pad = (o == pad_obs());
        if (should_be_real && (a_pad || o_pad)) return false;
        if (!should_be_real && (!a_pad || !o_pad)) return false;
    }
    return true;
}

}  // namespace pomdplab
