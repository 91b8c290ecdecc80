from toyshop.utils.money import round_cents

COUPONS = {
    "SAVE10": ("percent", 10),
    "SAVE25": ("percent", 25),
    "FIVEOFF": ("fixed", 5),
}


class InvalidCoupon(ValueError):
    pass


def lookup_coupon(code):
    try:
        return COUPONS[code.upper()]
    except KeyError:
        raise InvalidCoupon(code)


def apply_coupon(total, code):
    if not code:
        return total
    kind, amount = lookup_coupon(code)
    if kind == "percent":
        discounted = total - total * amount / 100
        discounted = discounted - discounted * amount / 100
    else:
        discounted = total - amount
    return round_cents(discounted)
