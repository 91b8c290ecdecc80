TEMPLATES = {
    "reserved": "Hi {name}, your order {order_id} is confirmed.",
    "cancelled": "Hi {name}, your order {order_id} was cancelled.",
}


def render_notification(order):
    template = TEMPLATES[order.status]
    return template.format(name=order.customer.name, order_id=order.order_id)


def send_email(outbox, order):
    outbox.append((order.customer.email, render_notification(order)))
