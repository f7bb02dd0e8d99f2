#include "qfiw/eigen_system.hpp"
#include "qfiw/errors.hpp"
#include "qfiw/threads.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qfiw {

namespace {

void verify_sector(const Eigen::SparseMatrix<double>& H, const EigenSector& sec, int block_id) {
    const Eigen::Index d = sec.energies.size();
    if (d == 0) return;
    // Full check is one extra matmul per sector; cheap at desk scale.
    const Eigen::MatrixXd HV = H * sec.vectors;
    double max_resid = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        const double r = (HV.col(i) - sec.energies(i) * sec.vectors.col(i)).norm();
        max_resid = std::max(max_resid, r);
    }
    if (max_resid > 1e-9)
        throw numerical_error("eigen residual " + std::to_string(max_resid) +
                              " exceeds 1e-9 in sector block " + std::to_string(block_id));
    const Eigen::MatrixXd gram = sec.vectors.transpose() * sec.vectors -
                                 Eigen::MatrixXd::Identity(d, d);
    const double ortho = gram.cwiseAbs().maxCoeff();
    if (ortho > 1e-10)
        throw numerical_error("orthonormality defect " + std::to_string(ortho) +
                              " exceeds 1e-10 in sector block " + std::to_string(block_id));
}

} // namespace

EigenSystem diagonalize(const HamiltonianBlocks& blocks) {
    EigenSystem es;
    es.spec = blocks.spec;
    es.sectors.resize(blocks.sectors.size());

    parallel_for_index(blocks.sectors.size(), [&](std::size_t b) {
        const auto& basis = blocks.sectors[b];
        EigenSector sec;
        sec.two_sz = basis.two_sz;
        sec.states = basis.states;
        const Eigen::MatrixXd dense = Eigen::MatrixXd(blocks.blocks[b]);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
        if (solver.info() != Eigen::Success)
            throw numerical_error("eigensolver failed to converge in sector block " +
                                  std::to_string(b));
        sec.energies = solver.eigenvalues();
        sec.vectors = solver.eigenvectors();
        verify_sector(blocks.blocks[b], sec, static_cast<int>(b));
        es.sectors[b] = std::move(sec);
    });

    std::size_t total = 0;
    for (const auto& sec : es.sectors) total += static_cast<std::size_t>(sec.energies.size());
    es.order.reserve(total);
    for (std::size_t b = 0; b < es.sectors.size(); ++b)
        for (Eigen::Index i = 0; i < es.sectors[b].energies.size(); ++i)
            es.order.push_back({es.sectors[b].energies(i), static_cast<int>(b),
                                static_cast<int>(i)});
    std::stable_sort(es.order.begin(), es.order.end(),
                     [](const EigenSystem::StateRef& a, const EigenSystem::StateRef& b) {
                         if (a.energy != b.energy) return a.energy < b.energy;
                         if (a.sector != b.sector) return a.sector < b.sector;
                         return a.index < b.index;
                     });
    es.ground_energy = es.order.front().energy;
    return es;
}

ThermalEnsemble thermal_ensemble(const EigenSystem& es, double beta) {
    if (!(beta > 0.0))
        throw validation_error("beta must be > 0, got " + std::to_string(beta));
    ThermalEnsemble ens;
    ens.beta = beta;
    ens.weights.reserve(es.sectors.size());
    const double e0 = es.ground_energy;
    double z = 0.0;
    for (const auto& sec : es.sectors) {
        Eigen::VectorXd w = (-beta * (sec.energies.array() - e0)).exp();
        z += w.sum();
        ens.weights.push_back(std::move(w));
    }
    for (auto& w : ens.weights) w /= z;
    ens.log_partition = std::log(z) - beta * e0;
    return ens;
}

double ThermalEnsemble::weight_sum() const {
    double s = 0.0;
    for (const auto& w : weights) s += w.sum();
    return s;
}

} // namespace qfiw
