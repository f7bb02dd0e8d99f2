#include "qfiw/chain.hpp"
#include "qfiw/errors.hpp"

#include <algorithm>
#include <string>

namespace qfiw {

void ChainSpec::validate() const {
    if (n_sites < 2)
        throw validation_error("n_sites must be >= 2, got " + std::to_string(n_sites));
    if (n_sites > 28)
        throw validation_error("n_sites beyond desk scale (max 28 basis bits)");
    if (coupling_j <= 0.0)
        throw validation_error("coupling_j must be > 0 (antiferromagnetic convention)");
    if (boundary == Boundary::periodic && n_sites % 2 != 0)
        throw validation_error(
            "periodic boundary requires even n_sites (staggered operator commensurate)");
}

std::vector<std::pair<int, int>> ChainSpec::bonds() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(static_cast<std::size_t>(n_sites));
    for (int i = 0; i + 1 < n_sites; ++i) out.emplace_back(i, i + 1);
    if (boundary == Boundary::periodic && n_sites > 2) out.emplace_back(n_sites - 1, 0);
    return out;
}

std::vector<SectorBasis> build_basis(int n_sites) {
    std::vector<SectorBasis> sectors(static_cast<std::size_t>(n_sites) + 1);
    for (int n_up = 0; n_up <= n_sites; ++n_up) {
        sectors[static_cast<std::size_t>(n_up)].n_up = n_up;
        sectors[static_cast<std::size_t>(n_up)].two_sz = 2 * n_up - n_sites;
    }
    const std::uint32_t dim = 1u << n_sites;
    for (std::uint32_t s = 0; s < dim; ++s)
        sectors[static_cast<std::size_t>(__builtin_popcount(s))].states.push_back(s);
    return sectors;
}

HamiltonianBlocks build_hamiltonian(const ChainSpec& spec) {
    spec.validate();
    HamiltonianBlocks out;
    out.spec = spec;
    out.sectors = build_basis(spec.n_sites);
    out.blocks.reserve(out.sectors.size());

    const auto bond_list = spec.bonds();
    const double j = spec.coupling_j;
    const double jz = spec.coupling_j * spec.anisotropy;

    for (const auto& sec : out.sectors) {
        const auto& states = sec.states;
        const Eigen::Index d = static_cast<Eigen::Index>(states.size());
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(states.size() * (bond_list.size() + 1));
        for (Eigen::Index k = 0; k < d; ++k) {
            const std::uint32_t s = states[static_cast<std::size_t>(k)];
            double diag = 0.0;
            for (const auto& [a, b] : bond_list) {
                const bool ua = (s >> a) & 1u;
                const bool ub = (s >> b) & 1u;
                diag += jz * (ua ? 0.5 : -0.5) * (ub ? 0.5 : -0.5);
                if (ua != ub) {
                    const std::uint32_t s2 = s ^ (1u << a) ^ (1u << b);
                    const auto it = std::lower_bound(states.begin(), states.end(), s2);
                    const Eigen::Index k2 = static_cast<Eigen::Index>(it - states.begin());
                    trip.emplace_back(k2, k, 0.5 * j);
                }
            }
            trip.emplace_back(k, k, diag);
        }
        Eigen::SparseMatrix<double> H(d, d);
        H.setFromTriplets(trip.begin(), trip.end());
        out.blocks.push_back(std::move(H));
    }
    return out;
}

} // namespace qfiw
