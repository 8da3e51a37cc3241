#include "tda/error.hpp"

namespace tda {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::empty_provider_set: return "EmptyProviderSet";
    case Errc::degenerate_performance: return "DegeneratePerformance";
    case Errc::invalid_load: return "InvalidLoad";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::no_samples: return "NoSamples";
    case Errc::plan_mismatch: return "PlanMismatch";
    case Errc::frame_too_large: return "FrameTooLarge";
    case Errc::decode_error: return "DecodeError";
    case Errc::unknown_kind: return "UnknownKind";
    case Errc::channel_closed: return "ChannelClosed";
    case Errc::io_error: return "IoError";
    case Errc::unknown_provider: return "UnknownProvider";
    case Errc::no_providers: return "NoProviders";
    case Errc::job_failed: return "JobFailed";
    case Errc::registration_rejected: return "RegistrationRejected";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::assembly_timeout: return "AssemblyTimeout";
    case Errc::duplicate_range: return "DuplicateRange";
    case Errc::incomplete: return "Incomplete";
    case Errc::empty_input: return "EmptyInput";
    case Errc::operand_timeout: return "OperandTimeout";
    case Errc::invalid_config: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace tda
