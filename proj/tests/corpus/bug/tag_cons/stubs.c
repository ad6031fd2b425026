#include <caml/mlvalues.h>
#include <caml/memory.h>
#include <caml/alloc.h>
#include <xenctrl.h>

CAMLprim value stub_xc_arch_physinfo_cap_flags(value xch_val)
{
CAMLparam1(xch_val);
CAMLlocal2(arch_cap_flags, arch_obj);
int tag;
tag = 1; /* tag x86 */

arch_obj = Tag_cons;/* BUG: tag stored into OCaml value */

arch_cap_flags = caml_alloc_small(1, tag);
Store_field(arch_cap_flags, 0, arch_obj); /* BUG: NULL pointer reachable from OCaml value */

CAMLreturn(arch_cap_flags);
}
