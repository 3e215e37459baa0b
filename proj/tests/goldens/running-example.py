# generated-by: hornpoc 0.1.0 model=running_example query=iknows(key1[])
import mocktoken

token = mocktoken.open_session()
x1 = token.known_value(2)  # key2[]
x5 = token.handle(1)  # handle1[]

x2 = token.put_wrap_key(x1)
x4 = token.export_wrapped(x2, x5)
x3 = mocktoken.decrypt_offline(x1, x4); mocktoken.report(x3)

token.cleanup()
