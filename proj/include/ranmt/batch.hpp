#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ranmt {

// Right-padded id matrix with a 0/1 mask marking real tokens. Shared wire
// type between the sampler and the model.
struct TokenMatrix {
  int rows = 0, cols = 0;
  std::vector<int32_t> ids;
  std::vector<uint8_t> mask;

  int32_t id(int r, int c) const { return ids[static_cast<size_t>(r) * cols + c]; }
  bool real(int r, int c) const { return mask[static_cast<size_t>(r) * cols + c] != 0; }
};

// Builds a TokenMatrix from framed id sequences, padding with pad_id.
TokenMatrix pack_rows(const std::vector<std::vector<int32_t>>& rows_in, int32_t pad_id);

enum class BatchOrigin { LRL, HRL, Mixed };
const char* batch_origin_name(BatchOrigin o);

struct MiniBatch {
  TokenMatrix src, tgt;
  std::vector<std::string> src_langs;  // per sentence
  BatchOrigin origin = BatchOrigin::Mixed;
  int64_t epoch = 0;       // Concat: completed whole-data passes
  bool epoch_end = false;  // Concat: last batch of an epoch
  size_t src_tokens = 0, tgt_tokens = 0;  // real (unpadded) token counts
};

}  // namespace ranmt
