#ifndef FAKE_CAML_MLVALUES_H
#define FAKE_CAML_MLVALUES_H

#include <stdint.h>

typedef intptr_t value;
typedef intptr_t intnat;

#define CAMLprim
#define Val_unit ((value)1)
#define Val_long(x) (((intnat)(x) << 1) + 1)
#define Long_val(v) ((v) >> 1)
#define Double_val(v) (*(double *)(v))

#endif
