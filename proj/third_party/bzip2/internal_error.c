/* Required by libbzip2 when built with BZ_NO_STDIO. An internal error means
   memory corruption inside the library; there is no safe way to continue. */
#include <stdio.h>
#include <stdlib.h>

void bz_internal_error(int errcode) {
  fprintf(stderr, "libbzip2 internal error %d\n", errcode);
  abort();
}
