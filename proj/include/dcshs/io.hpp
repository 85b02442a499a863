#pragma once

#include <string>

#include "dcshs/dataset.hpp"

namespace dcshs {

// Reads a KEEL-style .dat file (@relation/@attribute/@inputs/@outputs/@data).
// Numeric attributes parse as-is; nominal input attributes encode as their
// zero-based position in the declared category list. The class attribute is
// the @outputs name when present, the last attribute otherwise. Rows with a
// '?' cell are dropped and counted. The more frequent class value becomes
// the majority label; when the value literally named "positive" lands on the
// majority side the dataset is flagged relabeled.
LabeledDataset parse_keel(const std::string& path);

// Reads an RFC-4180 CSV with a header row: quoted fields, doubled-quote
// escapes, CR/LF tolerant. All columns except the label column must be
// numeric; missing cells ('?' or empty) drop the row with a count. Class
// mapping matches parse_keel.
LabeledDataset parse_csv(const std::string& path,
                         const std::string& label_column);

// Canonical CSV emission: feature columns x0..xN then the label column under
// its original class value names, doubles at full round-trip precision.
// Re-parsing yields an identical matrix and label vector.
void write_csv(const LabeledDataset& d, const std::string& path,
               const std::string& label_column = "class");

// Dispatches on extension: ".dat" -> parse_keel, anything else -> parse_csv.
LabeledDataset load_dataset(const std::string& path,
                            const std::string& label_column = "class");

}  // namespace dcshs
