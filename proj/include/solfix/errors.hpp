#pragma once

#include <stdexcept>
#include <string>

namespace solfix {

// Base class for every failure raised by the library. Subcommands map
// these onto distinct process exit codes.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- environment problems -------------------------------------------------
class CompilerNotFound : public Error { using Error::Error; };
class ProcessFailure : public Error { using Error::Error; };
class ProviderUnavailable : public Error { using Error::Error; };
class BackendUnavailable : public Error { using Error::Error; };
class IoFailure : public Error { using Error::Error; };

// --- contract violations / bad input ---------------------------------------
class ParseFailure : public Error { using Error::Error; };
class MalformedHtml : public Error { using Error::Error; };
class MissingLabel : public Error { using Error::Error; };
class SchemaMismatch : public Error { using Error::Error; };
class EmptyStore : public Error { using Error::Error; };
class UnknownGroundTruth : public Error { using Error::Error; };
class MissingBlockInput : public Error { using Error::Error; };
class BudgetTooSmall : public Error { using Error::Error; };
class EmptyInput : public Error { using Error::Error; };
class EmptyText : public Error { using Error::Error; };
class LengthMismatch : public Error { using Error::Error; };
class UsageError : public Error { using Error::Error; };

// --- mock provider ----------------------------------------------------------
class TranscriptExhausted : public Error { using Error::Error; };
class TranscriptMismatch : public Error { using Error::Error; };

// --- patch engine -----------------------------------------------------------
class PatchError : public Error { using Error::Error; };
class NoEditsFound : public PatchError { using PatchError::PatchError; };
class MalformedBlock : public PatchError { using PatchError::PatchError; };
class SearchNotFound : public PatchError { using PatchError::PatchError; };
class AmbiguousMatch : public PatchError { using PatchError::PatchError; };

} // namespace solfix
