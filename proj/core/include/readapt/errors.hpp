// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace readapt {

// Base class for every error the library raises on purpose. Callers that
// want a single catch-all can catch this; the CLI maps subclasses to exit
// codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes disagree where they must match.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

// A file does not follow the expected on-disk format (bad header, bad
// offsets, unknown dtype, malformed JSON/JSONL, inconsistent adapter dir).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Underlying read/write failed (missing file, short read, write error).
class IoError : public Error {
 public:
  using Error::Error;
};

// A shard file referenced by an index manifest does not exist.
class ShardMissing : public IoError {
 public:
  using IoError::IoError;
};

// max_shard_bytes is smaller than a single tensor.
class ShardTooSmall : public Error {
 public:
  using Error::Error;
};

// Provenance digest recorded in an adapter does not match the checkpoint
// it is being applied to.
class DigestMismatch : public Error {
 public:
  using Error::Error;
};

// The SVD solver failed to converge for a tensor.
class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

// Explained variance is undefined because every singular value is zero.
class AllZero : public Error {
 public:
  using Error::Error;
};

// A column (magnitude slice) has numerically zero norm during DoRA merge.
class DegenerateColumn : public Error {
 public:
  using Error::Error;
};

// An adapter target pattern or module resolves to nothing in the base model.
class UnresolvedTarget : public Error {
 public:
  using Error::Error;
};

// An example lacks a gold passage, or the gold passage is absent from the
// corpus.
class MissingGold : public Error {
 public:
  using Error::Error;
};

// Result/gold key sets differ in retrieval_accuracy.
class KeyMismatch : public Error {
 public:
  using Error::Error;
};

// A prediction id has no matching reference example.
class UnknownId : public Error {
 public:
  using Error::Error;
};

// A RAG prompt template was rendered without a context passage.
class MissingContext : public Error {
 public:
  using Error::Error;
};

// BM25 index build over an empty corpus.
class EmptyCorpus : public Error {
 public:
  using Error::Error;
};

// Arguments outside their documented range (bad tau, out-of-range scale
// without the override flag). The CLI maps this to the usage exit code.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace readapt
