from toyshop.cart import Cart
from toyshop.orders import Order

__all__ = ["Cart", "Order"]
