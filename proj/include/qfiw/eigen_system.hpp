#pragma once

#include "qfiw/chain.hpp"

#include <Eigen/Dense>
#include <vector>

namespace qfiw {

struct EigenSector {
    int two_sz = 0;
    std::vector<std::uint32_t> states;  // computational basis, ascending bitmask
    Eigen::VectorXd energies;           // ascending
    Eigen::MatrixXd vectors;            // columns are eigenvectors
};

// Exact eigen-data of a chain, organized by total-Sz sector. `order` is the
// deterministic global enumeration: energy ascending, ties broken by sector
// then in-sector index.
struct EigenSystem {
    ChainSpec spec;
    std::vector<EigenSector> sectors;   // two_sz ascending
    double ground_energy = 0.0;

    struct StateRef {
        double energy;
        int sector;
        int index;
    };
    std::vector<StateRef> order;

    std::size_t total_states() const { return order.size(); }
};

// Dense full diagonalization per sector. Throws numerical_error (with the
// offending block id) on solver failure or when the orthonormality/residual
// checks exceed 1e-10/1e-9.
EigenSystem diagonalize(const HamiltonianBlocks& blocks);

// Boltzmann weights over all eigenstates of an EigenSystem, evaluated with a
// max-energy shift so that beta up to 1e4 cannot overflow.
struct ThermalEnsemble {
    double beta = 1.0;
    std::vector<Eigen::VectorXd> weights;  // aligned with EigenSystem sectors
    double log_partition = 0.0;

    double weight_sum() const;
};

ThermalEnsemble thermal_ensemble(const EigenSystem& es, double beta);

} // namespace qfiw
