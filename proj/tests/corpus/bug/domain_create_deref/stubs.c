#include <caml/mlvalues.h>
#include <caml/memory.h>
#include <caml/alloc.h>
#include <caml/fail.h>
#include <xenctrl.h>

#define _H(__h) (*((xc_interface **)Data_custom_val(__h)))

CAMLprim value stub_xc_domain_create(value xch, value wanted_domid, value config)
{
    CAMLparam3(xch, wanted_domid, config);
    CAMLlocal2(l, arch_domconfig);
    int result;
    uint32_t domid = Int_val(wanted_domid);
    struct xen_domctl_createdomain cfg = {
        .ssidref = Int32_val(Field(config, 0)),
        .max_vcpus = Int_val(Field(config, 3)),
    };

    caml_enter_blocking_section(); /* release OCaml runtime/domain lock */

    /* BUG: dereference OCaml value and read C pointer */
    result = xc_domain_create(_H(xch), &domid, &cfg);

    caml_leave_blocking_section(); /* release OCaml runtime/domain lock */

    if (result < 0)
        failwith_xc(_H(xch));

    CAMLreturn(Val_int(domid));
}
