import argparse

from toyshop.cart import Cart
from toyshop.pricing import price_breakdown


def main(argv=None):
    parser = argparse.ArgumentParser(prog="toyshop")
    parser.add_argument("--sku", action="append", default=[])
    parser.add_argument("--price", type=float, action="append", default=[])
    parser.add_argument("--coupon", default="")
    parser.add_argument("--region", default="CA")
    args = parser.parse_args(argv)
    cart = Cart(coupon_code=args.coupon)
    for sku, price in zip(args.sku, args.price):
        cart.add_item(sku, price)
    print(price_breakdown(cart, args.region))
