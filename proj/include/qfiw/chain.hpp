#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cstdint>
#include <utility>
#include <vector>

namespace qfiw {

enum class Boundary { periodic, open };

// XXZ-class nearest-neighbour spin-1/2 chain,
//   H = J sum_i [ (S+_i S-_{i+1} + S-_i S+_{i+1})/2 + anisotropy * Sz_i Sz_{i+1} ],
// antiferromagnetic convention J > 0, anisotropy = 1 is the isotropic chain.
struct ChainSpec {
    int n_sites = 2;
    double coupling_j = 1.0;
    double anisotropy = 1.0;
    Boundary boundary = Boundary::periodic;

    void validate() const;
    // A periodic two-site ring would double-count its only bond; n=2 periodic
    // is defined as the single-bond open chain.
    std::vector<std::pair<int, int>> bonds() const;
};

// Computational-basis states (bitmask, bit=1 means spin up) with fixed up-spin
// count, listed in increasing bitmask order.
struct SectorBasis {
    int n_up = 0;
    int two_sz = 0;
    std::vector<std::uint32_t> states;
};

inline double spin_z(std::uint32_t state, int site) {
    return ((state >> site) & 1u) ? 0.5 : -0.5;
}

std::vector<SectorBasis> build_basis(int n_sites);

// Hamiltonian assembled per total-Sz sector; the blocks are exactly
// block-diagonal because every term conserves total Sz.
struct HamiltonianBlocks {
    ChainSpec spec;
    std::vector<SectorBasis> sectors;
    std::vector<Eigen::SparseMatrix<double>> blocks;
};

HamiltonianBlocks build_hamiltonian(const ChainSpec& spec);

} // namespace qfiw
