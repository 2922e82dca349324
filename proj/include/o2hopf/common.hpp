#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace o2hopf {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

constexpr double pi = 3.14159265358979323846;

// Error categories map to process exit codes: validation 2, numerical 3, io 4.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define O2HOPF_ERROR(NAME, BASE)                   \
    struct NAME : BASE {                           \
        explicit NAME(const std::string& what_arg) \
            : BASE(#NAME ": " + what_arg) {}       \
    }

O2HOPF_ERROR(InvalidInput, ValidationError);
O2HOPF_ERROR(ParseError, ValidationError);
O2HOPF_ERROR(GenericityViolation, NumericalError);
O2HOPF_ERROR(BranchMismatch, NumericalError);
O2HOPF_ERROR(NoConvergence, NumericalError);
O2HOPF_ERROR(SingularJacobian, NumericalError);
O2HOPF_ERROR(NoProfile, NumericalError);
O2HOPF_ERROR(BlowUp, NumericalError);
O2HOPF_ERROR(StepRejected, NumericalError);
O2HOPF_ERROR(WeightOverflow, NumericalError);
O2HOPF_ERROR(SolverFailure, NumericalError);
O2HOPF_ERROR(SplittingFailure, NumericalError);
O2HOPF_ERROR(StiffnessFailure, NumericalError);
O2HOPF_ERROR(ContourTooCoarse, NumericalError);
O2HOPF_ERROR(RootOnContour, NumericalError);
O2HOPF_ERROR(NoCrossing, NumericalError);
O2HOPF_ERROR(MultiplicityAnomaly, NumericalError);
O2HOPF_ERROR(ProjectionLeak, NumericalError);
O2HOPF_ERROR(KernelDimensionMismatch, NumericalError);
O2HOPF_ERROR(IllConditioned, NumericalError);
O2HOPF_ERROR(NoContraction, NumericalError);
O2HOPF_ERROR(FitDegenerate, NumericalError);

#undef O2HOPF_ERROR

inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ValidationError*>(&e)) return 2;
    if (dynamic_cast<const NumericalError*>(&e)) return 3;
    if (dynamic_cast<const IoError*>(&e)) return 4;
    return 1;
}

}  // namespace o2hopf
