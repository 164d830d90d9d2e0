#include "slicesim/error.hpp"

namespace slicesim {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::IllegalTransition: return "IllegalTransition";
        case ErrorCode::NotDecommissioned: return "NotDecommissioned";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::Infeasible: return "Infeasible";
        case ErrorCode::InsufficientCapacity: return "InsufficientCapacity";
        case ErrorCode::DuplicateRequest: return "DuplicateRequest";
        case ErrorCode::UnknownSlice: return "UnknownSlice";
        case ErrorCode::UnknownProbe: return "UnknownProbe";
        case ErrorCode::AmountExceedsAllocation: return "AmountExceedsAllocation";
        case ErrorCode::SliceQuarantined: return "SliceQuarantined";
        case ErrorCode::InvalidMixture: return "InvalidMixture";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::KExceedsN: return "KExceedsN";
        case ErrorCode::RangeTooSmall: return "RangeTooSmall";
        case ErrorCode::DegenerateInput: return "DegenerateInput";
        case ErrorCode::ClassMissing: return "ClassMissing";
        case ErrorCode::ClassTooSmall: return "ClassTooSmall";
        case ErrorCode::SingularCovariance: return "SingularCovariance";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NotFitted: return "NotFitted";
        case ErrorCode::EmptyReportSet: return "EmptyReportSet";
        case ErrorCode::LayoutMismatch: return "LayoutMismatch";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace slicesim
