from toyshop.discounts import apply_coupon
from toyshop.tax import sales_tax
from toyshop.utils.money import round_cents


def price_cart(cart, region):
    """Total due for a cart, after coupon and tax."""
    net = apply_coupon(cart.cart_total(), cart.coupon_code)
    return round_cents(net + sales_tax(net, region))


def price_breakdown(cart, region):
    gross = cart.cart_total()
    net = apply_coupon(gross, cart.coupon_code)
    tax = sales_tax(net, region)
    return {"gross": gross, "discount": round_cents(gross - net), "tax": tax, "total": round_cents(net + tax)}
