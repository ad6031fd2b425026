#include <caml/mlvalues.h>
#include <caml/memory.h>
#include <caml/fail.h>
#include <xenctrl.h>

#define _H(__h) (*((xc_interface **)Data_custom_val(__h)))
#define _D(__d) ((uint32_t)Int_val(__d))

CAMLprim value stub_xc_domain_assign_device(value xch, value domid, value desc,
                                            value rflag)
{
    CAMLparam4(xch, domid, desc, rflag);
    int ret;
    int domain, bus, dev, func;
    uint32_t sbdf;
    uint32_t flag = 0;

    domain = Int_val(Field(desc, 0));
    bus = Int_val(Field(desc, 1));
    dev = Int_val(Field(desc, 2));
    func = Int_val(Field(desc, 3));
    sbdf = encode_sbdf(domain, bus, dev, func);

    if (Int_val(rflag) == 1)
        flag = XEN_DOMCTL_DEV_RDM_RELAXED;

    ret = xc_assign_device(_H(xch), _D(domid), sbdf, flag);

    if (ret < 0)
        failwith_xc(_H(xch));

    CAMLreturn(Val_unit);
}
