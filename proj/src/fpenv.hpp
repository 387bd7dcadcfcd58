#pragma once

#if defined(__SSE__) || defined(__x86_64__)
#include <xmmintrin.h>
#define NSIR_HAVE_MXCSR 1
#endif

namespace nsir::detail {

// flush subnormals to zero while a long time-march runs; decaying densities otherwise
// crawl through the subnormal range
class FlushDenormals {
public:
    FlushDenormals()
    {
#ifdef NSIR_HAVE_MXCSR
        saved_ = _mm_getcsr();
        _mm_setcsr(saved_ | 0x8040);
#endif
    }
    ~FlushDenormals()
    {
#ifdef NSIR_HAVE_MXCSR
        _mm_setcsr(saved_);
#endif
    }
    FlushDenormals(const FlushDenormals&) = delete;
    FlushDenormals& operator=(const FlushDenormals&) = delete;

private:
    unsigned saved_ = 0;
};

} // namespace nsir::detail
