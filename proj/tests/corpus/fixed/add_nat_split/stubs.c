#include <caml/mlvalues.h>
#include <caml/memory.h>

typedef unsigned long bngdigit;
typedef bngdigit *bng;

extern bngdigit bng_add(bng a, long alen, bng b, long blen, bngdigit carry);

CAMLprim value add_nat_native(value nat1, value ofs1, value len1,
                              value nat2, value ofs2, value len2, value carry_in)
{
  CAMLparam5(nat1, ofs1, len1, nat2, ofs2);
  CAMLxparam2(len2, carry_in);
  bngdigit carry;

  carry = bng_add((bng)Data_custom_val(nat1) + Long_val(ofs1), Long_val(len1),
                  (bng)Data_custom_val(nat2) + Long_val(ofs2), Long_val(len2),
                  (bngdigit)Long_val(carry_in));
  CAMLreturn(Val_long(carry));
}

CAMLprim value add_nat_bytecode(value *argv, int argn)
{
  return add_nat_native(argv[0], argv[1], argv[2], argv[3],
                        argv[4], argv[5], argv[6]);
}
