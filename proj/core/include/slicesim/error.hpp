#pragma once

#include <stdexcept>
#include <string>

namespace slicesim {

enum class ErrorCode {
    IllegalTransition,
    NotDecommissioned,
    ParseError,
    DuplicateId,
    Infeasible,
    InsufficientCapacity,
    DuplicateRequest,
    UnknownSlice,
    UnknownProbe,
    AmountExceedsAllocation,
    SliceQuarantined,
    InvalidMixture,
    EmptyDataset,
    MissingColumn,
    KExceedsN,
    RangeTooSmall,
    DegenerateInput,
    ClassMissing,
    ClassTooSmall,
    SingularCovariance,
    DimensionMismatch,
    NotFitted,
    EmptyReportSet,
    LayoutMismatch,
    InvalidConfig,
    IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace slicesim
