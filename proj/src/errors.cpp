#include "edm/errors.hpp"

namespace edm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositiveConstantTerm: return "NonPositiveConstantTerm";
    case ErrorCode::IndexBeyondOrder: return "IndexBeyondOrder";
    case ErrorCode::InvalidParameters: return "InvalidParameters";
    case ErrorCode::MeanOutOfDomain: return "MeanOutOfDomain";
    case ErrorCode::MeasureOverflow: return "MeasureOverflow";
    case ErrorCode::UnboundedMeasure: return "UnboundedMeasure";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateValue: return "DuplicateValue";
    case ErrorCode::NegativeCount: return "NegativeCount";
    case ErrorCode::NoInteriorMaximum: return "NoInteriorMaximum";
    case ErrorCode::Underdispersed: return "Underdispersed";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DegeneratePooling: return "DegeneratePooling";
    case ErrorCode::ModelZeroOnSupport: return "ModelZeroOnSupport";
  }
  return "Unknown";
}

}  // namespace edm
