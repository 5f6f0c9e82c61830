#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "iclv/params.hpp"

namespace iclv {

// Which parameters the optimizer may move.  Shapes mirror IclvParams; every
// flagged entry becomes one packed coordinate (thresholds flag a whole
// indicator's J-2 inner cutpoints at once, correlations flag all L(L-1)/2
// angles at once).  The base-alternative lambda column is structurally zero
// and is ignored even if flagged.
struct ParamMask {
    std::vector<Eigen::Array<bool, Eigen::Dynamic, 1>> alpha;
    Eigen::Array<bool, Eigen::Dynamic, 1> delta;
    bool gamma_corr = false;
    Eigen::Array<bool, Eigen::Dynamic, 1> rho;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> meas_gamma;  // H x K
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> meas_d;      // H x L
    std::vector<bool> thresholds;                                   // per indicator
    Eigen::Array<bool, Eigen::Dynamic, 1> b;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> lambda;      // L x I
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> g;           // L x M
};

// Mask with every entry set to `value`, shaped after `ref`.
ParamMask mask_none(const IclvParams& ref);
// Everything estimable flagged free (base lambda column stays pinned).
ParamMask mask_all(const IclvParams& ref);

// Maps between a full parameter set and an unconstrained packed vector, so
// the optimizer never sees a box or a positive-definiteness constraint:
//   delta        <-> logit on (0,1)
//   Gamma        <-> spherical angles of its Cholesky rows, logit-scaled
//                    from (0,pi); any finite packed value maps back to a
//                    valid correlation matrix
//   thresholds   <-> log of the first positive cutpoint and log-increments
//                    between the rest, keeping them strictly ascending
//   all others   <-> identity
// Fixed (unflagged) entries are frozen at the reference values.
class ParamPacker {
  public:
    ParamPacker(IclvParams reference, ParamMask mask);

    int dim() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const { return names_; }
    const IclvParams& reference() const { return ref_; }

    Eigen::VectorXd pack(const IclvParams& p) const;
    IclvParams unpack(const Eigen::VectorXd& packed) const;
    // Natural-scale scalar per packed slot (delta as delta, correlations as
    // the lower-triangle Gamma entries, thresholds as the cutpoint values);
    // the scale on which standard errors are reported.
    Eigen::VectorXd natural(const IclvParams& p) const;

  private:
    IclvParams ref_;
    ParamMask mask_;
    std::vector<std::string> names_;
};

// Spherical-angle coordinates of a correlation matrix: L(L-1)/2 angles in
// (0,pi) scanning Cholesky rows top to bottom.  Any angle vector maps to a
// valid correlation matrix; round-trips up to numerical precision.
Eigen::VectorXd correlation_to_angles(const Eigen::MatrixXd& corr);
Eigen::MatrixXd angles_to_correlation(const Eigen::VectorXd& angles, int dim);

}  // namespace iclv
