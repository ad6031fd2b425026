#include <caml/mlvalues.h>
#include <caml/memory.h>
#include <caml/alloc.h>
#include <caml/fail.h>
#include <sys/mman.h>
#include <xenctrl.h>

struct mmap_interface {
    void *addr;
    int len;
};

static inline xc_interface *xch_of_val(value v)
{
    xc_interface *xch = *(xc_interface **)Data_custom_val(v);
    return xch;
}

CAMLprim value stub_map_foreign_range(value xch_val, value dom, value size, value mfn)
{
    CAMLparam4(xch_val, dom, size, mfn);
    CAMLlocal1(result);
    struct mmap_interface *intf;
    xc_interface *xch = xch_of_val(xch_val);
    unsigned long c_mfn = Nativeint_val(mfn);
    int len = Int_val(size);
    void *ptr;

 /* allocate memory for a C structure, wrap it in an abstract OCaml value */
 result = caml_alloc(Wsize_bsize(sizeof(struct mmap_interface)),
                Abstract_tag);

 caml_enter_blocking_section(); /* release OCaml runtime/domain lock */
 /* correct: store result in temporary C variable */
 ptr = xc_map_foreign_range(xch, Int_val(dom), len,PROT_READ|PROT_WRITE, c_mfn);
 caml_leave_blocking_section();/* reacquire OCaml runtime/domain lock */
 if (!ptr)
     caml_failwith("xc_map_foreign_range error");

 /* correct: points inside the OCaml value, with runtime lock is held */
 intf = Data_abstract_val(result);

 /* correct: store data in abstract OCaml value with runtime lock held */
 *intf = (struct mmap_interface){ ptr, len };

    CAMLreturn(result);
}
